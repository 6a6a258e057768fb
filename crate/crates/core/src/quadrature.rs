//! Gauss–Legendre rules and composite (panelled) integration.

use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule by Newton iteration on `P_n` from the Tricomi initial
    /// guess. Exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let nf = n as f64;
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            // Computed in f64, then cast: keeps f32 rules accurate too.
            let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::lit(-x);
            nodes[n - 1 - i] = T::lit(x);
            weights[i] = T::lit(w);
            weights[n - 1 - i] = T::lit(w);
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.mapped(a, b)
            .fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: `panels` equal sub-intervals, each with the same
/// Gauss–Legendre rule.
#[derive(Clone, Debug)]
pub struct Composite<T> {
    rule: GaussLegendre<T>,
    panels: usize,
}

impl<T: Real> Composite<T> {
    pub fn new(order: usize, panels: usize) -> Self {
        assert!(panels >= 1);
        Self {
            rule: GaussLegendre::new(order),
            panels,
        }
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn len(&self) -> usize {
        self.panels * self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All nodes and weights on `[a, b]`, in increasing node order.
    pub fn points(&self, a: T, b: T) -> Vec<(T, T)> {
        let width = (b - a) / T::from_usize(self.panels).unwrap();
        let mut out = Vec::with_capacity(self.len());
        for p in 0..self.panels {
            let lo = a + width * T::from_usize(p).unwrap();
            let hi = if p + 1 == self.panels { b } else { lo + width };
            out.extend(self.rule.mapped(lo, hi));
        }
        out
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let width = (b - a) / T::from_usize(self.panels).unwrap();
        let mut acc = T::zero();
        for p in 0..self.panels {
            let lo = a + width * T::from_usize(p).unwrap();
            acc = acc + self.rule.integrate(lo, lo + width, &mut f);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 64, 301] {
            let g = GaussLegendre::<f64>::new(n);
            let s: f64 = g.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let g = GaussLegendre::<f64>::new(6);
        // int_{-1}^{1} x^10 dx = 2/11
        let v = g.integrate(-1.0, 1.0, |x| x.powi(10));
        assert!((v - 2.0 / 11.0).abs() < 1e-15);
        let odd = g.integrate(-1.0, 1.0, |x| x.powi(11));
        assert!(odd.abs() < 1e-15);
    }

    #[test]
    fn known_two_point_nodes() {
        let g = GaussLegendre::<f64>::new(2);
        assert!((g.nodes()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g.nodes()[0] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn composite_integrates_oscillatory_cosine() {
        let q = Composite::<f64>::new(10, 40);
        let w = 200.0;
        let v = q.integrate(0.0, 1.0, |x| (w * x).cos());
        assert!((v - w.sin() / w).abs() < 1e-13);
        assert_eq!(q.points(0.0, 1.0).len(), 400);
    }

    #[test]
    fn single_precision_rule() {
        let g = GaussLegendre::<f32>::new(8);
        let v = g.integrate(0.0, 1.0, |x| x.exp());
        assert!((v - (1f32.exp() - 1.0)).abs() < 1e-6);
    }
}
