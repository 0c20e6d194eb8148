//! Holds the `acceptance` test target, which checks every exit criterion
//! of the workspace and prints one verdict line per criterion.
