//! Empty on purpose: the `acceptance` test target is the whole package.
