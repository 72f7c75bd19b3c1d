//! Piecewise polynomial trajectories on a time mesh.

use crate::error::{Error, Result};
use crate::numkernel::{norm_inf, Jet, Real};
use crate::polynomial::{LocalPolynomial, Side, TimeFunction};

/// Checks `t_0 < t_1 < ... < t_N` with `N >= 1`.
pub fn validate_mesh<R: Real>(mesh: &[R]) -> Result<()> {
    if mesh.len() < 2 {
        return Err(Error::InvalidMesh(format!(
            "a mesh needs at least one interval, got {} points",
            mesh.len()
        )));
    }
    if let Some(i) = mesh.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidMesh(format!(
            "mesh is not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

/// `N + 1` equidistant points from `t0` to `t_end`.
pub fn uniform_mesh<R: Real>(t0: &R, t_end: &R, n: usize) -> Result<Vec<R>> {
    if n == 0 {
        return Err(Error::InvalidMesh("N = 0 gives no intervals".into()));
    }
    let len = t_end.clone() - t0.clone();
    let mut mesh: Vec<R> = (0..n)
        .map(|i| t0.clone() + len.clone() * R::from_usize(i) / R::from_usize(n))
        .collect();
    mesh.push(t_end.clone());
    validate_mesh(&mesh)?;
    Ok(mesh)
}

/// One polynomial per mesh interval, plus the left limit `U(t_0^-)`.
///
/// As a [`TimeFunction`] the solution is evaluated from the left: a time in
/// `(t_{n-1}, t_n]` uses piece `n`, and `t_0` uses the first piece.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshSolution<R> {
    mesh: Vec<R>,
    pieces: Vec<LocalPolynomial<R>>,
    u0: Vec<R>,
}

impl<R: Real> MeshSolution<R> {
    pub fn new(mesh: Vec<R>, pieces: Vec<LocalPolynomial<R>>, u0: Vec<R>) -> Result<Self> {
        validate_mesh(&mesh)?;
        if pieces.len() + 1 != mesh.len() {
            return Err(Error::InvalidMesh(format!(
                "{} pieces for {} intervals",
                pieces.len(),
                mesh.len() - 1
            )));
        }
        for (n, p) in pieces.iter().enumerate() {
            if *p.a() != mesh[n] || *p.b() != mesh[n + 1] {
                return Err(Error::InvalidMesh(format!(
                    "piece {} does not live on its mesh interval",
                    n + 1
                )));
            }
            if p.dim() != u0.len() {
                return Err(Error::DimensionMismatch(format!(
                    "piece {} has {} components, u0 has {}",
                    n + 1,
                    p.dim(),
                    u0.len()
                )));
            }
        }
        Ok(Self { mesh, pieces, u0 })
    }

    pub fn mesh(&self) -> &[R] {
        &self.mesh
    }

    pub fn pieces(&self) -> &[LocalPolynomial<R>] {
        &self.pieces
    }

    /// Piece on `I_n = (t_{n-1}, t_n]`, `n = 1..=N`.
    pub fn piece(&self, n: usize) -> &LocalPolynomial<R> {
        &self.pieces[n - 1]
    }

    pub fn n_intervals(&self) -> usize {
        self.pieces.len()
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    /// Largest polynomial degree among the pieces.
    pub fn degree(&self) -> usize {
        self.pieces.iter().map(LocalPolynomial::degree).max().unwrap_or(0)
    }

    pub fn u0(&self) -> &[R] {
        &self.u0
    }

    /// Index `n` with `t` in `(t_{n-1}, t_n]` (or `n = 1` at `t_0`).
    pub fn locate(&self, t: &R) -> Result<usize> {
        let out = || Error::OutOfInterval {
            t: t.to_f64(),
            a: self.mesh[0].to_f64(),
            b: self.mesh[self.mesh.len() - 1].to_f64(),
        };
        let i = self.mesh.partition_point(|x| x < t);
        if i == 0 {
            if *t == self.mesh[0] {
                return Ok(1);
            }
            return Err(out());
        }
        if i == self.mesh.len() {
            return Err(out());
        }
        Ok(i)
    }

    pub fn eval(&self, t: &R, j: usize) -> Result<Vec<R>> {
        self.piece(self.locate(t)?).eval(t, j)
    }

    /// `U^{(j)}(t_n^-)` for `n >= 1`; for `n = 0` and `j = 0` the stored `u0`.
    pub fn left_limit(&self, n: usize, j: usize) -> Vec<R> {
        if n == 0 {
            return self.u0.clone();
        }
        self.piece(n).endpoint_derivative(Side::Right, j)
    }

    /// `U^{(j)}(t_n^+)` for `n < N`.
    pub fn right_limit(&self, n: usize, j: usize) -> Vec<R> {
        self.piece(n + 1).endpoint_derivative(Side::Left, j)
    }

    /// `U(t_N^-)`.
    pub fn endpoint_value(&self) -> Vec<R> {
        self.left_limit(self.n_intervals(), 0)
    }

    /// Largest `|[U^{(j)}]_n|_inf` over the interior mesh points.
    pub fn max_jump(&self, j: usize) -> R {
        (1..self.n_intervals()).fold(R::zero(), |acc, n| {
            let l = self.left_limit(n, j);
            let r = self.right_limit(n, j);
            let d: Vec<R> = r.into_iter().zip(l).map(|(x, y)| x - y).collect();
            R::max_of(acc, norm_inf(&d))
        })
    }

    /// `|[U]_0|_inf = |U(t_0^+) - u0|_inf`.
    pub fn initial_jump(&self) -> R {
        let r = self.piece(1).endpoint_derivative(Side::Left, 0);
        let d: Vec<R> = r.into_iter().zip(&self.u0).map(|(x, y)| x - y.clone()).collect();
        norm_inf(&d)
    }

    /// Piecewise derivative, with `du0` as its left limit at `t_0`.
    pub fn derivative(&self, du0: Vec<R>) -> Result<Self> {
        Self::new(
            self.mesh.clone(),
            self.pieces.iter().map(LocalPolynomial::derivative).collect(),
            du0,
        )
    }

    /// Applies `f` to every piece; `f` receives the 1-based interval index.
    pub fn map_pieces<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &LocalPolynomial<R>) -> Result<LocalPolynomial<R>>,
    {
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| f(i + 1, p).map_err(|e| e.at_interval(i + 1)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.mesh.clone(), pieces, self.u0.clone())
    }

    /// `m + 1` equidistant samples per interval including both ends, each end
    /// evaluated on the piece it belongs to (so mesh points appear twice).
    pub fn sample(&self, m: usize) -> Vec<(R, Vec<R>)> {
        let m = m.max(1);
        let mut out = Vec::with_capacity(self.n_intervals() * (m + 1));
        for p in &self.pieces {
            for s in 0..=m {
                let x = R::from_f64(-1.0) + R::from_f64(2.0) * R::from_usize(s) / R::from_usize(m);
                out.push((p.from_reference(&x), p.eval_reference(&x, 0)));
            }
        }
        out
    }

    /// Largest pointwise difference to another solution on the same mesh,
    /// sampled per piece at `m + 1` points.
    pub fn max_difference(&self, other: &Self, m: usize) -> Result<R> {
        if other.mesh != self.mesh || other.dim() != self.dim() {
            return Err(Error::InvalidMesh(
                "solutions live on different meshes".into(),
            ));
        }
        let a = self.sample(m);
        let b = other.sample(m);
        Ok(a.iter().zip(&b).fold(R::zero(), |acc, ((_, x), (_, y))| {
            let d: Vec<R> = x.iter().zip(y).map(|(p, q)| p.clone() - q.clone()).collect();
            R::max_of(acc, norm_inf(&d))
        }))
    }

    /// Largest sampled magnitude, a scale for relative comparisons.
    pub fn max_abs(&self, m: usize) -> R {
        self.sample(m)
            .iter()
            .fold(R::zero(), |acc, (_, v)| R::max_of(acc, norm_inf(v)))
    }
}

impl<R: Real> TimeFunction<R> for MeshSolution<R> {
    fn dim(&self) -> usize {
        self.u0.len()
    }

    fn taylor(&self, t: &R, order: usize) -> Result<Vec<Jet<R>>> {
        self.piece(self.locate(t)?).taylor(t, order)
    }
}
