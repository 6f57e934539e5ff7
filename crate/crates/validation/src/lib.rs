//! Acceptance checklist for `evifuse`; the checks live in `tests/acceptance.rs`.
