//! Gauss rules on the unit interval and collapsed (Duffy) rules on the
//! reference triangle `{(s, t) : s, t >= 0, s + t <= 1}`.

/// Gauss-Legendre nodes and weights on `[0, 1]`; exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

#[derive(Debug, Clone)]
pub struct EdgeRule {
    /// Parameters in [0, 1].
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl EdgeRule {
    pub fn gauss(n: usize) -> Self {
        let (points, weights) = gauss_legendre(n);
        EdgeRule { points, weights, degree: 2 * n - 1 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for EdgeRule {
    /// Five Gauss points, exact to degree 9.
    fn default() -> Self {
        EdgeRule::gauss(5)
    }
}

#[derive(Debug, Clone)]
pub struct TriangleRule {
    /// Reference coordinates `(s, t)`.
    pub points: Vec<[f64; 2]>,
    /// Weights summing to the reference area 1/2.
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Tensor Gauss rule mapped through `(u, v) -> (u, (1 - u) v)`.
    /// The Jacobian `1 - u` adds one degree in `u`, so `n` points per
    /// direction integrate total degree `2n - 2` exactly.
    pub fn collapsed(n: usize) -> Self {
        assert!(n >= 2, "collapsed rule needs at least two points per direction");
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in x.iter().zip(&w) {
            for (&v, &wv) in x.iter().zip(&w) {
                points.push([u, (1.0 - u) * v]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        TriangleRule { points, weights, degree: 2 * n - 2 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for TriangleRule {
    /// 25 points, exact to degree 8.
    fn default() -> Self {
        TriangleRule::collapsed(5)
    }
}
