//! Exact rational arithmetic for loads, feasibility factors and bounds.

use num_rational::Ratio;

/// Reduced fraction with positive denominator. Comparisons are exact.
pub type Rational = Ratio<i128>;

/// `num / den`, reduced. Panics if `den == 0`.
pub fn ratio(num: i128, den: i128) -> Rational {
    Ratio::new(num, den)
}

pub fn int(v: impl Into<i128>) -> Rational {
    Ratio::from_integer(v.into())
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Best rational approximation of `x` whose denominator does not exceed
/// `max_den`, accepted only if it lies within `tol` of `x`.
///
/// This is the only sanctioned way floating-point values enter the exact
/// domain (LP objective values, for instance).
pub fn approximate(x: f64, tol: f64, max_den: i128) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let target = if neg { -x } else { x };
    // Continued-fraction convergents h/k.
    let (mut h_prev, mut h) = (0i128, 1i128);
    let (mut k_prev, mut k) = (1i128, 0i128);
    let mut rest = target;
    let mut best: Option<Rational> = None;
    for _ in 0..64 {
        let a = floor_f64(rest);
        if a > 1e18 {
            break;
        }
        let a_int = a as i128;
        let h_next = a_int * h + h_prev;
        let k_next = a_int * k + k_prev;
        if k_next > max_den {
            break;
        }
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        let candidate = Ratio::new(h, k);
        let err = target - h as f64 / k as f64;
        if (if err < 0.0 { -err } else { err }) <= tol {
            best = Some(candidate);
            break;
        }
        let frac = rest - a;
        if frac <= 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    best.map(|r| if neg { -r } else { r })
}

/// Floor for non-negative values that fit in i64; enough for the
/// continued-fraction loop without pulling in libm.
fn floor_f64(x: f64) -> f64 {
    let t = x as i64 as f64;
    if t > x {
        t - 1.0
    } else {
        t
    }
}

/// Floor of a rational as an integer.
pub fn floor(r: &Rational) -> i128 {
    r.floor().to_integer()
}

/// Ceiling of a rational as an integer.
pub fn ceil(r: &Rational) -> i128 {
    r.ceil().to_integer()
}
