//! Thin wrappers over `f64` transcendentals so the crate builds both with the
//! standard library and with `libm` on `no_std` targets.

#![allow(dead_code)]

macro_rules! shim {
    ($name:ident, $std:ident, $libm:ident) => {
        #[cfg(feature = "std")]
        #[inline(always)]
        pub(crate) fn $name(x: f64) -> f64 {
            x.$std()
        }
        #[cfg(not(feature = "std"))]
        #[inline(always)]
        pub(crate) fn $name(x: f64) -> f64 {
            libm::$libm(x)
        }
    };
}

shim!(exp, exp, exp);
shim!(ln, ln, log);
shim!(ln_1p, ln_1p, log1p);
shim!(exp_m1, exp_m1, expm1);
shim!(sqrt, sqrt, sqrt);
shim!(cbrt, cbrt, cbrt);
shim!(cos, cos, cos);
shim!(sin, sin, sin);
shim!(acos, acos, acos);
shim!(abs, abs, fabs);
shim!(floor, floor, floor);
shim!(ceil, ceil, ceil);
shim!(trunc, trunc, trunc);
shim!(round, round, round);

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    x.powf(y)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    y.atan2(x)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn copysign(x: f64, y: f64) -> f64 {
    x.copysign(y)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub(crate) fn copysign(x: f64, y: f64) -> f64 {
    libm::copysign(x, y)
}
