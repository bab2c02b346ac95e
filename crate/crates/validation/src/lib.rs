//! Acceptance suite for the crossdamp workspace. The checks live in
//! `tests/acceptance.rs` and print one PASS/FAIL line per criterion.
