//! Holds the `acceptance` test target; run it with
//! `cargo test -p binned-bosons-verify --test acceptance`.
