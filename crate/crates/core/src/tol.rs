/// Comparison tolerance used by constraint evaluation and dominance tests.
///
/// Grid coordinates are produced by floating arithmetic, so every relational
/// test carries a slack `tau`: `a <= b` is taken as `a <= b + tau`, while a
/// strict `a < b` requires `a < b - tau`. Equality is `|a - b| <= tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(1e-9)
    }
}

impl Tolerance {
    pub fn le(self, a: f64, b: f64) -> bool {
        a <= b + self.0
    }

    pub fn ge(self, a: f64, b: f64) -> bool {
        a >= b - self.0
    }

    pub fn lt(self, a: f64, b: f64) -> bool {
        a < b - self.0
    }

    pub fn gt(self, a: f64, b: f64) -> bool {
        a > b + self.0
    }

    pub fn eq(self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.0
    }
}
