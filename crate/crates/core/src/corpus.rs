//! Recursion systems shipped with the crate.

pub const BASILICA: &str = include_str!("../corpus/basilica.ssg");
pub const GUPTA_SIDKI: &str = include_str!("../corpus/gupta-sidki.ssg");
pub const HANOI: &str = include_str!("../corpus/hanoi.ssg");
pub const ADDING_MACHINE: &str = include_str!("../corpus/adding-machine.ssg");
pub const IMG_Z3: &str = include_str!("../corpus/img-z3.ssg");
pub const IMG_ZM2: &str = include_str!("../corpus/img-zm2.ssg");
pub const IMG_T4: &str = include_str!("../corpus/img-t4.ssg");
pub const IMG_T3: &str = include_str!("../corpus/img-t3.ssg");
pub const IMG_MT3: &str = include_str!("../corpus/img-mt3.ssg");
pub const IMG_P1_QUADRATIC: &str = include_str!("../corpus/img-p1-quadratic.ssg");
pub const LONG_RANGE: &str = include_str!("../corpus/long-range.ssg");
pub const Z_3TO2: &str = include_str!("../corpus/z-3to2.ssg");
pub const UNIVERSAL_GRIGORCHUK: &str = include_str!("../corpus/universal-grigorchuk.ssg");
pub const SIERPINSKI_CARPET: &str = include_str!("../corpus/sierpinski-carpet.ssg");
pub const FINITE_S3_DIAGONAL: &str = include_str!("../corpus/finite-s3-diagonal.ssg");

/// `(name, source)` for every bundled system, in a fixed order.
pub fn bundled() -> Vec<(&'static str, &'static str)> {
    vec![
        ("basilica", BASILICA),
        ("gupta-sidki", GUPTA_SIDKI),
        ("hanoi", HANOI),
        ("adding-machine", ADDING_MACHINE),
        ("img-z3", IMG_Z3),
        ("img-zm2", IMG_ZM2),
        ("img-t4", IMG_T4),
        ("img-t3", IMG_T3),
        ("img-mt3", IMG_MT3),
        ("img-p1-quadratic", IMG_P1_QUADRATIC),
        ("long-range", LONG_RANGE),
        ("z-3to2", Z_3TO2),
        ("universal-grigorchuk", UNIVERSAL_GRIGORCHUK),
        ("sierpinski-carpet", SIERPINSKI_CARPET),
        ("finite-s3-diagonal", FINITE_S3_DIAGONAL),
    ]
}

pub fn by_name(name: &str) -> Option<&'static str> {
    bundled().into_iter().find(|(n, _)| *n == name).map(|(_, t)| t)
}
