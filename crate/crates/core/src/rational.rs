//! Exact rationals: machine-word fast path with a big-integer fallback.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Always normalized: `Small(n, d)` has `d > 0` and `gcd(n, d) = 1`; `Big` is
/// used only when the value does not fit in `i64` parts.
#[derive(Clone, Debug)]
pub enum Q {
    Small(i64, i64),
    Big(BigRational),
}

impl Q {
    pub const ZERO: Q = Q::Small(0, 1);
    pub const ONE: Q = Q::Small(1, 1);

    pub fn int(n: i64) -> Q {
        Q::Small(n, 1)
    }

    pub fn new(n: i64, d: i64) -> Q {
        assert!(d != 0, "zero denominator");
        from_i128(i128::from(n), i128::from(d))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Q::Small(n, _) => *n == 0,
            Q::Big(b) => b.is_zero(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Q::Small(n, _) => n.signum() as i32,
            Q::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Q::Small(_, d) => *d == 1,
            Q::Big(b) => b.is_integer(),
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Q::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::Big(b) => b.clone(),
        }
    }

    fn from_big(b: BigRational) -> Q {
        match (b.numer().to_i64(), b.denom().to_i64()) {
            (Some(n), Some(d)) => Q::Small(n, d),
            _ => Q::Big(b),
        }
    }

    pub fn floor(&self) -> BigInt {
        match self {
            Q::Small(n, d) => BigInt::from(Integer::div_floor(n, d)),
            Q::Big(b) => b.floor().to_integer(),
        }
    }

    pub fn ceil(&self) -> BigInt {
        match self {
            Q::Small(n, d) => BigInt::from(Integer::div_ceil(n, d)),
            Q::Big(b) => b.ceil().to_integer(),
        }
    }

    /// Distance to the nearest integer, as a rational in [0, 1/2].
    pub fn fractionality(&self) -> Q {
        let f = self.sub(&Q::from_big(BigRational::from_integer(self.floor())));
        let g = Q::ONE.sub(&f);
        if f.cmp(&g) == Ordering::Less {
            f
        } else {
            g
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Q::Small(n, 1) => Some(*n),
            Q::Small(..) => None,
            Q::Big(b) if b.is_integer() => b.to_integer().to_i64(),
            Q::Big(_) => None,
        }
    }

    pub fn neg(&self) -> Q {
        match self {
            Q::Small(n, d) if *n != i64::MIN => Q::Small(-n, *d),
            _ => Q::from_big(-self.to_big()),
        }
    }

    pub fn add(&self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                let (a, b, c, d) = (i128::from(*a), i128::from(*b), i128::from(*c), i128::from(*d));
                let n = if b == d { a.checked_add(c) } else { (a * d).checked_add(c * b) };
                match n {
                    Some(n) => from_i128(n, if b == d { b } else { b * d }),
                    None => Q::from_big(self.to_big() + o.to_big()),
                }
            }
            _ => Q::from_big(self.to_big() + o.to_big()),
        }
    }

    pub fn sub(&self, o: &Q) -> Q {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                from_i128(i128::from(*a) * i128::from(*c), i128::from(*b) * i128::from(*d))
            }
            _ => Q::from_big(self.to_big() * o.to_big()),
        }
    }

    pub fn div(&self, o: &Q) -> Q {
        assert!(!o.is_zero(), "division by zero");
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                from_i128(i128::from(*a) * i128::from(*d), i128::from(*b) * i128::from(*c))
            }
            _ => Q::from_big(self.to_big() / o.to_big()),
        }
    }
}

fn from_i128(mut n: i128, mut d: i128) -> Q {
    if d < 0 {
        n = -n;
        d = -d;
    }
    let g = n.gcd(&d);
    if g > 1 {
        n /= g;
        d /= g;
    }
    match (i64::try_from(n), i64::try_from(d)) {
        (Ok(n), Ok(d)) => Q::Small(n, d),
        _ => Q::Big(BigRational::new(BigInt::from(n), BigInt::from(d))),
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Q {}

impl Ord for Q {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                (i128::from(*a) * i128::from(*d)).cmp(&(i128::from(*c) * i128::from(*b)))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Q::Small(n, 1) => write!(f, "{n}"),
            Q::Small(n, d) => write!(f, "{n}/{d}"),
            Q::Big(b) => write!(f, "{b}"),
        }
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Q {
        Q::int(n)
    }
}
