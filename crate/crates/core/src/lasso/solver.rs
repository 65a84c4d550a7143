//! Proximal Newton (IRLS) outer loop, cyclic coordinate descent inner loop.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};

use super::kkt::report_from_gradient;
use super::{default_eps_ratio, default_lambda_path, soft_threshold, LambdaGrid, LassoPath, PathEntry, PenaltySpec, SolverOptions};
use crate::logistic::{clamp_prob, mean_log_loss, sigmoid};
use crate::{Error, Float, Result};

const WEIGHT_FLOOR: f64 = 1e-10;
const MAX_HALVINGS: usize = 40;
const MAX_INNER_PASSES: usize = 100_000;
const NEWTON_EVERY: usize = 10;
const MAX_NEWTON_DIM: usize = 100;

/// Solves `A x = b` in place for symmetric positive definite `A` (`m × m`,
/// row-major). Returns `false` if a pivot is not positive.
fn cholesky_solve<F: Float>(a: &mut [F], b: &mut [F], m: usize) -> bool {
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if !(d > F::zero()) {
            return false;
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let mut v = a[i * m + j];
            for k in 0..j {
                v -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = v / d;
        }
    }
    for i in 0..m {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * m + k] * b[k];
        }
        b[i] = v / a[i * m + i];
    }
    for i in (0..m).rev() {
        let mut v = b[i];
        for k in i + 1..m {
            v -= a[k * m + i] * b[k];
        }
        b[i] = v / a[i * m + i];
    }
    true
}

/// `Σ aᵢ bᵢ cᵢ`, four independent accumulators.
#[inline]
fn dot3<F: Float>(a: &[F], b: &[F], c: &[F]) -> F {
    let n = a.len().min(b.len()).min(c.len());
    let (a, b, c) = (&a[..n], &b[..n], &c[..n]);
    let mut acc = [F::zero(); 4];
    let chunks = n / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i] * c[i];
        acc[1] += a[i + 1] * b[i + 1] * c[i + 1];
        acc[2] += a[i + 2] * b[i + 2] * c[i + 2];
        acc[3] += a[i + 3] * b[i + 3] * c[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..n {
        s += a[i] * b[i] * c[i];
    }
    s
}

struct Problem<'a, F: Float> {
    /// `p × n`, so each feature's values are contiguous.
    xt: Array2<F>,
    y: ArrayView1<'a, F>,
    offset: Array1<F>,
    pf: &'a [F],
    fit_intercept: bool,
}

#[derive(Clone)]
struct State<F: Float> {
    mu: F,
    beta: Array1<F>,
    eta: Array1<F>,
}

impl<'a, F: Float> Problem<'a, F> {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn p(&self) -> usize {
        self.xt.nrows()
    }

    fn zero_state(&self) -> State<F> {
        State { mu: F::zero(), beta: Array1::zeros(self.p()), eta: self.offset.clone() }
    }

    fn penalty(&self, beta: &Array1<F>, lambda: F, frozen: &[bool]) -> F {
        let mut s = F::zero();
        for j in 0..beta.len() {
            if !frozen[j] && self.pf[j] > F::zero() && self.pf[j].is_finite() {
                s += self.pf[j] * beta[j].abs();
            }
        }
        lambda * s
    }

    fn objective(&self, eta: &Array1<F>, beta: &Array1<F>, lambda: F, frozen: &[bool]) -> F {
        mean_log_loss(eta.view(), self.y) + self.penalty(beta, lambda, frozen)
    }

    /// Mean-loss gradient `(mean(p − y), Xᵀ(p − y)/n)`.
    fn gradient(&self, eta: &Array1<F>) -> (F, Array1<F>) {
        let nf = F::from_usize_lossy(self.n());
        let r: Vec<F> = eta.iter().zip(self.y.iter()).map(|(&e, &yi)| sigmoid(e) - yi).collect();
        let g0 = r.iter().fold(F::zero(), |a, &v| a + v) / nf;
        let g = self
            .xt
            .rows()
            .into_iter()
            .map(|xj| {
                let xj = xj.to_slice().expect("contiguous rows");
                xj.iter().zip(&r).fold(F::zero(), |a, (&xv, &rv)| a + xv * rv) / nf
            })
            .collect();
        (g0, g)
    }

    fn kkt_worst(&self, st: &State<F>, lambda: F, frozen: &[bool], scale: F) -> F {
        let (g0, g) = self.gradient(&st.eta);
        // Frozen coordinates are excluded from this subproblem.
        let pf: Vec<F> = (0..self.p()).map(|j| if frozen[j] { F::infinity() } else { self.pf[j] }).collect();
        report_from_gradient(g0, g.view(), st.beta.view(), lambda, &pf, scale, self.fit_intercept).worst()
    }

    /// One coordinate-descent pass over `coords` (plus the intercept) on the
    /// weighted least-squares model. Returns the largest `h_j Δ²`.
    #[allow(clippy::too_many_arguments)]
    fn cd_pass(
        &self,
        coords: &[usize],
        w: &[F],
        h: &[F],
        sum_w: F,
        res: &mut [F],
        beta: &mut Array1<F>,
        mu: &mut F,
        lambda: F,
    ) -> F {
        let nf = F::from_usize_lossy(self.n());
        let mut max_change = F::zero();
        for &j in coords {
            let hj = h[j];
            if hj <= F::zero() {
                continue;
            }
            let xj = self.xt.row(j);
            let xj = xj.as_slice().expect("contiguous rows");
            let dot = dot3(xj, w, res);
            let old = beta[j];
            let u = dot / nf + hj * old;
            let new = soft_threshold(u, lambda * self.pf[j]) / hj;
            if new != old {
                let d = new - old;
                for (r, &xv) in res.iter_mut().zip(xj) {
                    *r -= xv * d;
                }
                beta[j] = new;
                max_change = max_change.max(hj * d * d);
            }
        }
        if self.fit_intercept {
            let d = w.iter().zip(res.iter()).fold(F::zero(), |acc, (&wv, &rv)| acc + wv * rv) / sum_w;
            if d != F::zero() {
                res.iter_mut().for_each(|r| *r -= d);
                *mu += d;
                max_change = max_change.max(sum_w / nf * d * d);
            }
        }
        max_change
    }

    /// Exact minimizer of the weighted least-squares model over the current
    /// orthant of `coords` (nonzero or unpenalized, plus the intercept), truncated at the first sign
    /// change. No-op when the restricted Hessian is not positive definite.
    fn orthant_step(&self, coords: &[usize], w: &[F], res: &mut [F], beta: &mut Array1<F>, mu: &mut F, lambda: F) {
        let n = self.n();
        let nf = F::from_usize_lossy(n);
        let cols: Vec<&[F]> = coords.iter().map(|&j| self.xt.row(j).to_slice().expect("contiguous rows")).collect();
        let k = cols.len() + usize::from(self.fit_intercept);
        if k == 0 {
            return;
        }
        let ones = vec![F::one(); n];
        let col = |a: usize| -> &[F] {
            if a < cols.len() {
                cols[a]
            } else {
                &ones
            }
        };
        let mut hess = vec![F::zero(); k * k];
        let mut rhs = vec![F::zero(); k];
        for a in 0..k {
            for b in 0..=a {
                let v = dot3(col(a), w, col(b)) / nf;
                hess[a * k + b] = v;
                hess[b * k + a] = v;
            }
            // Negative gradient of the model plus penalty at the current point.
            let mut g = dot3(col(a), w, res) / nf;
            if a < cols.len() {
                let j = coords[a];
                if self.pf[j] > F::zero() {
                    g -= lambda * self.pf[j] * beta[j].signum();
                }
            }
            rhs[a] = g;
        }
        if !cholesky_solve(&mut hess, &mut rhs, k) || rhs.iter().any(|v| !v.is_finite()) {
            return;
        }
        let mut t = F::one();
        let mut hit = None;
        for (a, &j) in coords.iter().enumerate() {
            let (b, d) = (beta[j], rhs[a]);
            if self.pf[j] > F::zero() && b != F::zero() && (b + d).signum() != b.signum() {
                let tj = -b / d;
                if tj < t {
                    t = tj;
                    hit = Some(a);
                }
            }
        }
        let mut shift = vec![F::zero(); n];
        for a in 0..k {
            let d = if hit == Some(a) { -beta[coords[a]] } else { rhs[a] * t };
            if d == F::zero() {
                continue;
            }
            for (s, &xv) in shift.iter_mut().zip(col(a)) {
                *s += xv * d;
            }
            if a < cols.len() {
                let j = coords[a];
                beta[j] = if hit == Some(a) { F::zero() } else { beta[j] + d };
            } else {
                *mu += d;
            }
        }
        for (r, s) in res.iter_mut().zip(&shift) {
            *r -= *s;
        }
    }

    /// Solves at one λ starting from `st`. Returns whether the KKT tolerance was met.
    fn solve(&self, st: &mut State<F>, lambda: F, frozen: &[bool], opts: &SolverOptions<F>, scale: F) -> Result<bool> {
        let n = self.n();
        let nf = F::from_usize_lossy(n);
        let tol = opts.tol;
        let free: Vec<usize> = (0..self.p()).filter(|&j| !frozen[j]).collect();
        let floor = F::lit(WEIGHT_FLOOR);
        let mut obj = self.objective(&st.eta, &st.beta, lambda, frozen);
        let mut worst = self.kkt_worst(st, lambda, frozen, scale);
        if worst <= tol {
            return Ok(true);
        }
        for _ in 0..opts.max_iter {
            let thr = {
                let t = (F::lit(1e-2) * tol).max(F::lit(0.1) * worst.min(F::one())) * scale;
                (t * t).max(F::epsilon() * F::epsilon())
            };
            let mut w = Array1::zeros(n);
            let mut res = Array1::zeros(n);
            Zip::from(&mut w).and(&mut res).and(&st.eta).and(self.y).for_each(|wv, rv, &e, &yv| {
                let p = sigmoid(e);
                let pc = clamp_prob(p);
                *wv = (pc * (F::one() - pc)).max(floor);
                *rv = (yv - p) / *wv;
            });
            let sum_w = w.sum();
            let mut h = vec![F::zero(); self.p()];
            for &j in &free {
                let xj = self.xt.row(j);
                let xj = xj.as_slice().expect("contiguous rows");
                h[j] = dot3(xj, w.as_slice().expect("owned array"), xj) / nf;
            }

            let w_s = w.as_slice().expect("owned array");
            let res_s = res.as_slice_mut().expect("owned array");
            let mut beta = st.beta.clone();
            let mut mu = st.mu;
            let mut passes = 0;
            loop {
                let full = self.cd_pass(&free, w_s, &h, sum_w, res_s, &mut beta, &mut mu, lambda);
                passes += 1;
                if full < thr || passes > MAX_INNER_PASSES {
                    break;
                }
                let active: Vec<usize> =
                    free.iter().copied().filter(|&j| beta[j] != F::zero() || self.pf[j] == F::zero()).collect();
                let mut since = 0;
                loop {
                    let ch = self.cd_pass(&active, w_s, &h, sum_w, res_s, &mut beta, &mut mu, lambda);
                    passes += 1;
                    since += 1;
                    if ch < thr || passes > MAX_INNER_PASSES {
                        break;
                    }
                    if since >= NEWTON_EVERY && active.len() <= MAX_NEWTON_DIM {
                        since = 0;
                        let live: Vec<usize> =
                            active.iter().copied().filter(|&j| beta[j] != F::zero() || self.pf[j] == F::zero()).collect();
                        self.orthant_step(&live, w_s, res_s, &mut beta, &mut mu, lambda);
                    }
                }
            }

            let d_beta = &beta - &st.beta;
            let d_mu = mu - st.mu;
            let mut d_eta = Array1::from_elem(n, d_mu);
            for (j, &d) in d_beta.iter().enumerate() {
                if d != F::zero() {
                    Zip::from(&mut d_eta).and(&self.xt.row(j)).for_each(|e, &xv| *e += xv * d);
                }
            }

            let slack = F::lit(10.0) * F::epsilon() * obj.abs().max(F::one());
            let mut t = F::one();
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let beta_t = &st.beta + &(&d_beta * t);
                let eta_t = &st.eta + &(&d_eta * t);
                let obj_t = self.objective(&eta_t, &beta_t, lambda, frozen);
                if obj_t <= obj + slack {
                    accepted = Some((beta_t, eta_t, st.mu + d_mu * t, obj_t));
                    break;
                }
                t = t * F::lit(0.5);
            }
            let Some((beta_t, eta_t, mu_t, obj_t)) = accepted else {
                log::debug!("lasso line search stalled at lambda = {lambda}");
                break;
            };
            if !mu_t.is_finite() || beta_t.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged(format!("non-finite coefficients at lambda = {lambda}")));
            }
            st.beta = beta_t;
            st.eta = eta_t;
            st.mu = mu_t;
            obj = obj_t;
            worst = self.kkt_worst(st, lambda, frozen, scale);
            if worst <= tol {
                return Ok(true);
            }
        }
        Ok(worst <= tol)
    }

    fn entry(&self, st: &State<F>, lambda: F, converged: bool) -> PathEntry<F> {
        PathEntry {
            lambda,
            intercept: st.mu,
            beta: st.beta.clone(),
            deviance: F::lit(2.0) * mean_log_loss(st.eta.view(), self.y),
            nonzero_count: st.beta.iter().filter(|&&b| b != F::zero()).count(),
            converged,
        }
    }

    /// Fit with every penalized coordinate held at zero.
    fn null_state(&self, opts: &SolverOptions<F>) -> Result<(State<F>, bool)> {
        let frozen: Vec<bool> = self.pf.iter().map(|&v| v != F::zero()).collect();
        let mut st = self.zero_state();
        let mut converged = self.solve(&mut st, F::zero(), &frozen, opts, F::one())?;
        // Tighten to the scale later checks use.
        if let Some(lmax) = self.lambda_max_from(&st).filter(|&v| v > F::zero() && v < F::one()) {
            converged = self.solve(&mut st, F::zero(), &frozen, opts, lmax)?;
        }
        Ok((st, converged))
    }

    fn lambda_max_from(&self, st: &State<F>) -> Option<F> {
        let (_, g) = self.gradient(&st.eta);
        let mut best: Option<F> = None;
        for j in 0..self.p() {
            let w = self.pf[j];
            if w > F::zero() && w.is_finite() {
                let v = g[j].abs() / w;
                best = Some(best.map_or(v, |b: F| b.max(v)));
            }
        }
        best
    }
}

fn check_inputs<F: Float>(x: ArrayView2<F>, y: ArrayView1<F>, spec: &PenaltySpec<F>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} rows in X, {} outcomes", x.nrows(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("no rows".into()));
    }
    if y.iter().any(|&v| v != F::zero() && v != F::one()) {
        return Err(Error::NonBinaryOutcome);
    }
    spec.validate(x.nrows(), x.ncols())
}

fn problem<'a, F: Float>(
    x: ArrayView2<'a, F>,
    y: ArrayView1<'a, F>,
    spec: &'a PenaltySpec<F>,
    fit_intercept: bool,
) -> Problem<'a, F> {
    Problem {
        xt: x.t().as_standard_layout().into_owned(),
        y,
        offset: spec.offset.clone().unwrap_or_else(|| Array1::zeros(y.len())),
        pf: &spec.penalty_factors,
        fit_intercept,
    }
}

/// Intercept (plus offset and unpenalized features) fit with every penalized
/// coefficient at zero.
pub fn null_fit<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    spec: &PenaltySpec<F>,
    opts: &SolverOptions<F>,
) -> Result<PathEntry<F>> {
    check_inputs(x, y, spec)?;
    let prob = problem(x, y, spec, opts.fit_intercept);
    let (st, converged) = prob.null_state(opts)?;
    Ok(prob.entry(&st, F::zero(), converged))
}

/// Smallest λ at which every penalized coefficient is zero:
/// `max |x_jᵀ(y − p̂₀)| / (n · pf_j)` over finite positive `pf_j`, where `p̂₀`
/// comes from the fit with all penalized coefficients held at zero.
pub fn lambda_max<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    spec: &PenaltySpec<F>,
    opts: &SolverOptions<F>,
) -> Result<F> {
    check_inputs(x, y, spec)?;
    let prob = problem(x, y, spec, opts.fit_intercept);
    let (st, _) = prob.null_state(opts)?;
    prob.lambda_max_from(&st).ok_or(Error::NoPenalizedFeatures)
}

/// Fits the whole λ path with warm starts.
///
/// At λ ≥ λ_max the solution is the null fit. When nothing is penalized the
/// path holds the null fit at each requested λ (a single `λ = 0` entry for an
/// automatic grid).
pub fn fit_logistic_lasso<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    spec: &PenaltySpec<F>,
    opts: &SolverOptions<F>,
) -> Result<LassoPath<F>> {
    check_inputs(x, y, spec)?;
    let prob = problem(x, y, spec, opts.fit_intercept);
    let (null, null_converged) = prob.null_state(opts)?;
    if null.beta.iter().chain(std::iter::once(&null.mu)).any(|v| !v.is_finite()) {
        return Err(Error::Diverged("null fit".into()));
    }
    let lmax = prob.lambda_max_from(&null);
    let lambdas = match (&spec.lambdas, lmax) {
        (LambdaGrid::Given(l), _) => l.clone(),
        (LambdaGrid::Auto { .. }, None) => vec![F::zero()],
        (LambdaGrid::Auto { n_lambda, eps_ratio }, Some(lm)) => {
            let eps = eps_ratio.unwrap_or_else(|| default_eps_ratio(x.nrows(), x.ncols()));
            if *n_lambda == 1 || lm <= F::zero() {
                vec![lm]
            } else {
                default_lambda_path(lm, *n_lambda, eps)
            }
        }
    };
    let Some(lmax) = lmax else {
        let entries = lambdas.iter().map(|&l| prob.entry(&null, l, null_converged)).collect();
        return Ok(LassoPath { entries, lambda_max: None });
    };

    let frozen: Vec<bool> = spec.penalty_factors.iter().map(|v| v.is_infinite()).collect();
    let scale = if lmax > F::zero() { lmax } else { F::one() };
    let mut st = null.clone();
    let mut entries: Vec<PathEntry<F>> = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let entry = if lambda >= lmax {
            st = null.clone();
            prob.entry(&null, lambda, null_converged)
        } else {
            let converged = prob.solve(&mut st, lambda, &frozen, opts, scale)?;
            if !converged {
                log::warn!("lasso did not reach tolerance at lambda = {lambda}");
            }
            prob.entry(&st, lambda, converged)
        };
        if let Some(prev) = entries.last() {
            if entry.nonzero_count < prev.nonzero_count {
                log::debug!(
                    "active set shrank from {} to {} at lambda = {lambda}",
                    prev.nonzero_count,
                    entry.nonzero_count
                );
            }
        }
        entries.push(entry);
    }
    Ok(LassoPath { entries, lambda_max: Some(lmax) })
}
