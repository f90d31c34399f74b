//! Holds the `acceptance` test target, which runs the full end-to-end
//! criteria against `qsearch-core` and prints one PASS/FAIL line each.
//! Run it alone with `cargo test -p qsearch-validation --test acceptance`.
