//! Vector algebra and edge-wrapping world geometry.

use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Continuous 2D vector in world units. Screen convention: `+x` east, `+y` south.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };
    /// Unit vector pointing north (towards the top of the screen).
    pub const NORTH: Vec2 = Vec2 { x: 0.0, y: -1.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        libm::sqrt(self.length_squared())
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector in the same direction, or zero for the zero vector.
    pub fn normalize_or_zero(self) -> Vec2 {
        let len = self.length();
        if len > 0.0 {
            self / len
        } else {
            Vec2::ZERO
        }
    }

    /// Clamp the magnitude to `max_mag`.
    pub fn limit(self, max_mag: f64) -> Vec2 {
        limit(self, max_mag)
    }

    /// Compass bearing of the vector in degrees: 0 is north, 90 east,
    /// increasing clockwise, in `[0, 360)`. The zero vector maps to 0.
    pub fn bearing_deg(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let deg = libm::atan2(self.x, -self.y).to_degrees();
        let deg = if deg < 0.0 { deg + 360.0 } else { deg };
        if deg >= 360.0 {
            0.0
        } else {
            deg
        }
    }

    /// Unit vector with the given compass bearing (see [`Vec2::bearing_deg`]).
    pub fn from_bearing_deg(deg: f64) -> Vec2 {
        let (s, c) = sin_cos_deg(deg);
        Vec2::new(s, -c)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Returns `v` unchanged if `‖v‖ ≤ max_mag`, otherwise `v` rescaled to length `max_mag`.
pub fn limit(v: Vec2, max_mag: f64) -> Vec2 {
    let len = v.length();
    if len <= max_mag {
        v
    } else {
        let mut out = v * (max_mag / len);
        // rounding can leave the result an ulp above the cap
        while out.length() > max_mag {
            out = out * (1.0 - f64::EPSILON);
        }
        out
    }
}

/// `(sin, cos)` of an angle given in degrees. Multiples of 45° are exact
/// (cardinal directions give exact zeros and ones; diagonals give equal
/// components), which keeps action directions free of rounding noise.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let mut d = libm::fmod(deg, 360.0);
    if d < 0.0 {
        d += 360.0;
    }
    let quadrant = libm::floor(d / 90.0);
    let r = d - quadrant * 90.0;
    let (s, c) = if r == 0.0 {
        (0.0, 1.0)
    } else if r == 45.0 {
        (core::f64::consts::FRAC_1_SQRT_2, core::f64::consts::FRAC_1_SQRT_2)
    } else if r < 45.0 {
        let rad = r.to_radians();
        (libm::sin(rad), libm::cos(rad))
    } else {
        let rad = (90.0 - r).to_radians();
        (libm::cos(rad), libm::sin(rad))
    };
    // Rotate (s, c) by quadrant * 90°.
    match quadrant as i64 {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// Invalid torus dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvalidTorus {
    pub width: f64,
    pub height: f64,
}

impl fmt::Display for InvalidTorus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "torus dimensions must be positive and finite, got {} x {}",
            self.width, self.height
        )
    }
}

/// Edge-wrapping rectangular world of `width × height` world units.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Torus {
    width: f64,
    height: f64,
}

impl Torus {
    pub fn new(width: f64, height: f64) -> Result<Self, InvalidTorus> {
        if width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite() {
            Ok(Torus { width, height })
        } else {
            Err(InvalidTorus { width, height })
        }
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.height
    }

    /// Largest possible torus distance, `sqrt((W/2)² + (H/2)²)`.
    pub fn max_distance(&self) -> f64 {
        libm::hypot(self.width / 2.0, self.height / 2.0)
    }

    /// Map `p` into `[0, W) × [0, H)`.
    pub fn wrap(&self, p: Vec2) -> Vec2 {
        Vec2::new(wrap_coord(p.x, self.width), wrap_coord(p.y, self.height))
    }

    /// Shortest distance between two wrapped positions.
    pub fn distance(&self, a: Vec2, b: Vec2) -> f64 {
        let dx = libm::fabs(a.x - b.x);
        let dy = libm::fabs(a.y - b.y);
        let dx = dx.min(self.width - dx);
        let dy = dy.min(self.height - dy);
        libm::sqrt(dx * dx + dy * dy)
    }

    /// Component-wise shortest displacement from `a` to `b`.
    ///
    /// A component wraps when its plain difference exceeds half the world
    /// extent; an exact half-extent difference keeps the plain (non-wrapping)
    /// value.
    pub fn direction(&self, a: Vec2, b: Vec2) -> Vec2 {
        Vec2::new(
            shortest_delta(b.x - a.x, self.width),
            shortest_delta(b.y - a.y, self.height),
        )
    }
}

fn wrap_coord(v: f64, extent: f64) -> f64 {
    let mut r = libm::fmod(v, extent);
    if r < 0.0 {
        r += extent;
    }
    // -tiny + extent can round up to extent itself.
    if r >= extent {
        r -= extent;
    }
    r
}

fn shortest_delta(delta: f64, extent: f64) -> f64 {
    if libm::fabs(delta) > extent / 2.0 {
        if delta > 0.0 {
            delta - extent
        } else {
            delta + extent
        }
    } else {
        delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn torus800() -> Torus {
        Torus::new(800.0, 800.0).unwrap()
    }

    /// Minimum over the 9 axis translates of `b`; returns (distance, displacement).
    fn nine_translate(a: Vec2, b: Vec2, t: &Torus) -> (f64, Vec2) {
        let mut best = (f64::INFINITY, Vec2::ZERO);
        for i in [-1.0, 0.0, 1.0] {
            for j in [-1.0, 0.0, 1.0] {
                let c = Vec2::new(b.x + i * t.width(), b.y + j * t.height());
                let d = c - a;
                let dist = (d.x * d.x + d.y * d.y).sqrt();
                if dist < best.0 {
                    best = (dist, d);
                }
            }
        }
        best
    }

    #[test]
    fn wrap_examples() {
        let t = torus800();
        assert_eq!(t.wrap(Vec2::new(805.0, 10.0)), Vec2::new(5.0, 10.0));
        assert_eq!(t.wrap(Vec2::new(400.0, 400.0)), Vec2::new(400.0, 400.0));
        // oracle: add W/H repeatedly until in range
        let mut p = Vec2::new(-1.0, -801.0);
        while p.x < 0.0 {
            p.x += 800.0;
        }
        while p.y < 0.0 {
            p.y += 800.0;
        }
        assert_eq!(p, Vec2::new(799.0, 799.0));
        assert_eq!(t.wrap(Vec2::new(-1.0, -801.0)), p);
    }

    #[test]
    fn wrap_tiny_negative_stays_in_range() {
        let t = torus800();
        let w = t.wrap(Vec2::new(-1e-17, -1e-300));
        assert!(w.x >= 0.0 && w.x < 800.0);
        assert!(w.y >= 0.0 && w.y < 800.0);
    }

    #[test]
    fn distance_examples() {
        let t = torus800();
        let a = Vec2::new(10.0, 10.0);
        let b = Vec2::new(790.0, 790.0);
        let (oracle, _) = nine_translate(a, b, &t);
        assert!((t.distance(a, b) - oracle).abs() < 1e-12);
        assert!((t.distance(a, b) - 28.284271247461902).abs() < 1e-9);
        assert_eq!(t.distance(a, a), 0.0);
        let far = t.distance(Vec2::ZERO, Vec2::new(400.0, 400.0));
        assert!((far - nine_translate(Vec2::ZERO, Vec2::new(400.0, 400.0), &t).0).abs() < 1e-12);
        assert!((far - 565.685424949238).abs() < 1e-9);
        assert!((far - t.max_distance()).abs() < 1e-12);
    }

    #[test]
    fn direction_examples() {
        let t = torus800();
        let d = t.direction(Vec2::new(10.0, 10.0), Vec2::new(790.0, 10.0));
        assert_eq!(d, Vec2::new(-20.0, 0.0));
        assert_eq!(
            t.direction(Vec2::new(100.0, 100.0), Vec2::new(150.0, 100.0)),
            Vec2::new(50.0, 0.0)
        );
        assert_eq!(t.direction(Vec2::new(3.0, 4.0), Vec2::new(3.0, 4.0)), Vec2::ZERO);
    }

    #[test]
    fn direction_half_width_tie_keeps_plain_difference() {
        let t = torus800();
        assert_eq!(
            t.direction(Vec2::new(0.0, 0.0), Vec2::new(400.0, 0.0)),
            Vec2::new(400.0, 0.0)
        );
        assert_eq!(
            t.direction(Vec2::new(400.0, 0.0), Vec2::new(0.0, 0.0)),
            Vec2::new(-400.0, 0.0)
        );
    }

    #[test]
    fn limit_examples() {
        assert_eq!(limit(Vec2::new(3.0, 4.0), 10.0), Vec2::new(3.0, 4.0));
        assert_eq!(limit(Vec2::new(3.0, 4.0), 5.0), Vec2::new(3.0, 4.0));
        let l = limit(Vec2::new(6.0, 8.0), 5.0);
        assert_eq!(l, Vec2::new(3.0, 4.0));
        assert!((l.length() - 5.0).abs() < 1e-12);
        assert_eq!(limit(Vec2::ZERO, 0.0), Vec2::ZERO);
        assert_eq!(limit(Vec2::new(1.0, 1.0), 0.0), Vec2::ZERO);
    }

    #[test]
    fn bearing_convention() {
        assert_eq!(Vec2::new(0.0, -1.0).bearing_deg(), 0.0);
        assert_eq!(Vec2::new(1.0, 0.0).bearing_deg(), 90.0);
        assert_eq!(Vec2::new(0.0, 1.0).bearing_deg(), 180.0);
        assert_eq!(Vec2::new(-1.0, 0.0).bearing_deg(), 270.0);
        assert_eq!(Vec2::from_bearing_deg(90.0), Vec2::new(1.0, 0.0));
        assert_eq!(Vec2::from_bearing_deg(180.0), Vec2::new(0.0, 1.0));
        let d = Vec2::from_bearing_deg(45.0);
        assert_eq!(d.x, -d.y);
    }

    #[test]
    fn sin_cos_matches_std_off_grid() {
        for k in 0..3600 {
            let deg = k as f64 * 0.1 - 180.0;
            let (s, c) = sin_cos_deg(deg);
            assert!((s - deg.to_radians().sin()).abs() < 1e-12, "{deg}");
            assert!((c - deg.to_radians().cos()).abs() < 1e-12, "{deg}");
        }
    }

    fn wrapped() -> impl Strategy<Value = Vec2> {
        (0.0..800.0f64, 0.0..600.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    proptest! {
        #[test]
        fn distance_matches_nine_translates(a in wrapped(), b in wrapped()) {
            let t = Torus::new(800.0, 600.0).unwrap();
            let (oracle, disp) = nine_translate(a, b, &t);
            prop_assert!((t.distance(a, b) - oracle).abs() < 1e-9);
            prop_assert_eq!(t.distance(a, b), t.distance(b, a));
            prop_assert!(t.distance(a, b) <= (b - a).length() + 1e-12);
            prop_assert!(t.distance(a, b) <= t.max_distance() + 1e-12);
            let d = t.direction(a, b);
            prop_assert!((d - disp).length() < 1e-9);
            prop_assert!((d.length() - t.distance(a, b)).abs() < 1e-9);
            let reached = t.wrap(a + d);
            prop_assert!(t.distance(reached, b) < 1e-9);
        }

        #[test]
        fn limit_idempotent(x in -50.0..50.0f64, y in -50.0..50.0f64, m in 0.0..20.0f64) {
            let v = Vec2::new(x, y);
            let once = limit(v, m);
            prop_assert_eq!(limit(once, m).x, once.x);
            prop_assert_eq!(limit(once, m).y, once.y);
            prop_assert!(once.length() <= m + 1e-12);
        }

        #[test]
        fn wrap_idempotent_and_periodic(x in -5000.0..5000.0f64, y in -5000.0..5000.0f64,
                                       k in -4i32..4, l in -4i32..4) {
            let t = torus800();
            let p = Vec2::new(x, y);
            let w = t.wrap(p);
            prop_assert!(w.x >= 0.0 && w.x < 800.0 && w.y >= 0.0 && w.y < 800.0);
            prop_assert_eq!(t.wrap(w), w);
            let shifted = t.wrap(p + Vec2::new(k as f64 * 800.0, l as f64 * 800.0));
            prop_assert!(t.distance(shifted, w) < 1e-9);
        }
    }
}
