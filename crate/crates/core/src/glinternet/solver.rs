//! Proximal Newton outer loop with a FISTA inner loop on the quadratic model,
//! restricted to a working set of groups that grows until every group passes
//! its stationarity check.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use super::{GlinternetModel, GroupLassoPath, GroupPathEntry};
use crate::lasso::{default_lambda_path, LambdaGrid, SolverOptions};
use crate::logistic::{clamp_prob, logit, mean_log_loss, sigmoid};
use crate::{Error, Float, Result};

const WEIGHT_FLOOR: f64 = 1e-5;
const MAX_HALVINGS: usize = 40;
const MAX_INNER: usize = 20_000;
const DEFAULT_EPS_RATIO: f64 = 1e-2;

/// Group stationarity residuals of one solution.
///
/// `intercept` is `|ḡ₀|`; `active` the largest `‖g_g + λγ_g β_g/‖β_g‖‖₂ / λ_max`;
/// `inactive` the largest relative excess `(‖g_g‖₂ − λγ_g)/(λγ_g)`, so an
/// inactive group passes when `‖g_g‖₂ ≤ λγ_g(1 + tol)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupKktReport<F> {
    pub intercept: F,
    pub active: F,
    pub inactive: F,
}

impl<F: Float> GroupKktReport<F> {
    pub fn worst(&self) -> F {
        self.intercept.max(self.active).max(self.inactive)
    }

    pub fn passes(&self, tol: F) -> bool {
        self.worst() <= tol
    }
}

fn norm<F: Float>(v: impl IntoIterator<Item = F>) -> F {
    v.into_iter().fold(F::zero(), |a, x| a + x * x).sqrt()
}

/// Residual of one group; `true` when it belongs to the active component.
/// Gradient residuals are divided by `scale`.
fn group_residual<F: Float>(g: &[F], coef: &[F], pen: F, scale: F) -> (bool, F) {
    let cn = norm(coef.iter().copied());
    if cn > F::zero() {
        (true, norm(g.iter().zip(coef).map(|(&gi, &ci)| gi + pen * ci / cn)) / scale)
    } else {
        let gn = norm(g.iter().copied());
        if pen > F::zero() {
            (false, ((gn - pen) / pen).max(F::zero()))
        } else {
            (false, gn / scale)
        }
    }
}

/// Internal problem. Group 0 is the unpenalized intercept (unique column 0).
struct Problem<'a, F: Float> {
    u: &'a Array2<F>,
    y: ArrayView1<'a, F>,
    cols: Vec<Vec<usize>>,
    weight: Vec<F>,
    /// λ_max of the problem (1 when zero); the intercept is left unscaled.
    scale: F,
}

#[derive(Clone)]
struct State<F: Float> {
    coef: Vec<Vec<F>>,
    eta: Array1<F>,
}

impl<'a, F: Float> Problem<'a, F> {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn n_groups(&self) -> usize {
        self.cols.len()
    }

    fn objective(&self, st: &State<F>, lambda: F) -> F {
        let pen = st.coef.iter().zip(&self.weight).fold(F::zero(), |a, (c, &w)| a + w * norm(c.iter().copied()));
        mean_log_loss(st.eta.view(), self.y) + lambda * pen
    }

    /// `(p − y)/n` at `eta`.
    fn residual(&self, eta: &Array1<F>) -> Array1<F> {
        let nf = F::from_usize_lossy(self.n());
        Zip::from(eta).and(self.y).map_collect(|&e, &yv| (sigmoid(e) - yv) / nf)
    }

    fn full_gradient(&self, eta: &Array1<F>) -> Array1<F> {
        self.u.t().dot(&self.residual(eta))
    }

    fn scale_of(&self, k: usize) -> F {
        if k == 0 {
            F::one()
        } else {
            self.scale
        }
    }

    fn gather(&self, grad_u: &Array1<F>, k: usize) -> Vec<F> {
        self.cols[k].iter().map(|&c| grad_u[c]).collect()
    }

    fn report(&self, grad_u: &Array1<F>, st: &State<F>, lambda: F) -> GroupKktReport<F> {
        let mut rep = GroupKktReport { intercept: F::zero(), active: F::zero(), inactive: F::zero() };
        for k in 0..self.n_groups() {
            let g = self.gather(grad_u, k);
            let (active, r) = group_residual(&g, &st.coef[k], lambda * self.weight[k], self.scale_of(k));
            if k == 0 {
                rep.intercept = r;
            } else if active {
                rep.active = rep.active.max(r);
            } else {
                rep.inactive = rep.inactive.max(r);
            }
        }
        rep
    }

    fn null_state(&self) -> State<F> {
        let ybar = self.y.mean().unwrap_or(F::lit(0.5));
        let mu = logit(clamp_prob(ybar));
        let mut coef: Vec<Vec<F>> = self.cols.iter().map(|c| vec![F::zero(); c.len()]).collect();
        coef[0][0] = mu;
        State { coef, eta: Array1::from_elem(self.n(), mu) }
    }

    /// Solves at `lambda` over the working set `ws` (which holds group 0).
    /// Returns whether every working-set group met `tol`.
    fn solve_ws(&self, st: &mut State<F>, lambda: F, ws: &[usize], opts: &SolverOptions<F>, trace: &mut Vec<F>) -> Result<bool> {
        let n = self.n();
        let nf = F::from_usize_lossy(n);
        let tol = opts.tol;

        let mut a_cols: Vec<usize> = ws.iter().flat_map(|&k| self.cols[k].iter().copied()).collect();
        a_cols.sort_unstable();
        a_cols.dedup();
        let mut local = vec![usize::MAX; self.u.ncols()];
        for (i, &c) in a_cols.iter().enumerate() {
            local[c] = i;
        }
        let blocks: Vec<Vec<usize>> = ws.iter().map(|&k| self.cols[k].iter().map(|&c| local[c]).collect()).collect();
        let ua = self.u.select(Axis(1), &a_cols);
        let pens: Vec<F> = ws.iter().map(|&k| lambda * self.weight[k]).collect();
        let scales: Vec<F> = ws.iter().map(|&k| self.scale_of(k)).collect();

        let mut obj = self.objective(st, lambda);
        trace.push(obj);
        for _ in 0..opts.max_iter {
            let r = self.residual(&st.eta);
            let grad_a = ua.t().dot(&r);
            let coef0: Vec<Vec<F>> = ws.iter().map(|&k| st.coef[k].clone()).collect();
            let worst = ws_worst(&grad_a, &blocks, &coef0, &pens, &scales);
            if worst <= tol {
                return Ok(true);
            }

            let floor = F::lit(WEIGHT_FLOOR);
            let sw: Array1<F> = st.eta.mapv(|e| {
                let p = clamp_prob(sigmoid(e));
                (p * (F::one() - p)).max(floor).sqrt()
            });
            let b = &ua * &sw.view().insert_axis(Axis(1));
            let gram = b.t().dot(&b) / nf;

            let inner_tol = (worst * F::lit(0.1)).min(F::lit(0.1)).max(tol * F::lit(0.1));
            let coef_new = fista(&gram, &grad_a, &blocks, &coef0, &pens, &scales, inner_tol);

            let mut d_a = Array1::zeros(a_cols.len());
            for (bi, block) in blocks.iter().enumerate() {
                for (pos, &c) in block.iter().enumerate() {
                    d_a[c] += coef_new[bi][pos] - coef0[bi][pos];
                }
            }
            let d_eta = ua.dot(&d_a);
            let slack = F::lit(10.0) * F::epsilon() * obj.abs().max(F::one());
            let mut t = F::one();
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let mut trial = st.clone();
                for (bi, &k) in ws.iter().enumerate() {
                    for pos in 0..coef0[bi].len() {
                        trial.coef[k][pos] = coef0[bi][pos] + t * (coef_new[bi][pos] - coef0[bi][pos]);
                    }
                }
                if t == F::one() {
                    // Keep exact zeros from the thresholding step.
                    for (bi, &k) in ws.iter().enumerate() {
                        trial.coef[k].clone_from(&coef_new[bi]);
                    }
                }
                trial.eta = &st.eta + &(&d_eta * t);
                let obj_t = self.objective(&trial, lambda);
                if obj_t <= obj + slack {
                    accepted = Some((trial, obj_t));
                    break;
                }
                t = t * F::lit(0.5);
            }
            let Some((next, obj_t)) = accepted else {
                log::debug!("glinternet line search stalled at lambda = {lambda}");
                break;
            };
            if next.eta.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged(format!("non-finite linear predictor at lambda = {lambda}")));
            }
            *st = next;
            obj = obj_t;
            trace.push(obj);
        }
        let r = self.residual(&st.eta);
        let grad_a = ua.t().dot(&r);
        let coef: Vec<Vec<F>> = ws.iter().map(|&k| st.coef[k].clone()).collect();
        Ok(ws_worst(&grad_a, &blocks, &coef, &pens, &scales) <= tol)
    }
}

fn ws_worst<F: Float>(grad_a: &Array1<F>, blocks: &[Vec<usize>], coef: &[Vec<F>], pens: &[F], scales: &[F]) -> F {
    let mut worst = F::zero();
    for (bi, block) in blocks.iter().enumerate() {
        let g: Vec<F> = block.iter().map(|&c| grad_a[c]).collect();
        worst = worst.max(group_residual(&g, &coef[bi], pens[bi], scales[bi]).1);
    }
    worst
}

/// Minimizes `gᵀd + ½ dᵀGd + Σ pen_b ‖z_b‖` over the stacked block
/// coefficients `z`, where `d` maps `z − z₀` onto the unique columns.
#[allow(clippy::too_many_arguments)]
fn fista<F: Float>(
    gram: &Array2<F>,
    grad: &Array1<F>,
    blocks: &[Vec<usize>],
    z0: &[Vec<F>],
    pens: &[F],
    scales: &[F],
    tol: F,
) -> Vec<Vec<F>> {
    let m = grad.len();
    let scatter = |z: &[Vec<F>]| {
        let mut d = Array1::zeros(m);
        for (bi, block) in blocks.iter().enumerate() {
            for (pos, &c) in block.iter().enumerate() {
                d[c] += z[bi][pos] - z0[bi][pos];
            }
        }
        d
    };
    // Smooth part and its gradient at a point given `d` and `G d`.
    let smooth = |d: &Array1<F>, gd: &Array1<F>| grad.dot(d) + F::lit(0.5) * d.dot(gd);
    let block_grad = |gd: &Array1<F>| -> Vec<Vec<F>> {
        blocks.iter().map(|block| block.iter().map(|&c| grad[c] + gd[c]).collect()).collect()
    };
    let dist2 = |a: &[Vec<F>], b: &[Vec<F>]| {
        a.iter().zip(b).flat_map(|(u, v)| u.iter().zip(v).map(|(&x, &y)| (x - y) * (x - y))).fold(F::zero(), |s, v| s + v)
    };

    // Largest eigenvalue of the stacked quadratic by power iteration.
    let mut v: Vec<Vec<F>> = blocks.iter().map(|b| vec![F::one(); b.len()]).collect();
    let mut lip = F::zero();
    for _ in 0..30 {
        let mut dv = Array1::zeros(m);
        for (bi, block) in blocks.iter().enumerate() {
            for (pos, &c) in block.iter().enumerate() {
                dv[c] += v[bi][pos];
            }
        }
        let gdv = gram.dot(&dv);
        let w: Vec<Vec<F>> = blocks.iter().map(|block| block.iter().map(|&c| gdv[c]).collect()).collect();
        let wn = norm(w.iter().flatten().copied());
        if wn <= F::zero() {
            break;
        }
        lip = wn / norm(v.iter().flatten().copied());
        v = w.into_iter().map(|b| b.into_iter().map(|x| x / wn).collect()).collect();
    }
    let mut lip = (lip * F::lit(1.05)).max(F::lit(1e-12));

    let mut x: Vec<Vec<F>> = z0.to_vec();
    let mut dx = Array1::zeros(m);
    let mut gdx = Array1::zeros(m);
    let mut yk = x.clone();
    let mut dy = dx.clone();
    let mut gdy = gdx.clone();
    let mut tk = F::one();
    for _ in 0..MAX_INNER {
        let gy = block_grad(&gdy);
        let sy = smooth(&dy, &gdy);
        let (xn, dxn, gdxn) = loop {
            let xn: Vec<Vec<F>> = yk
                .iter()
                .zip(&gy)
                .zip(pens)
                .map(|((yb, gb), &pen)| {
                    let v: Array1<F> = yb.iter().zip(gb).map(|(&a, &g)| a - g / lip).collect();
                    super::group_soft_threshold(v.view(), pen / lip).to_vec()
                })
                .collect();
            let dxn = scatter(&xn);
            let gdxn = gram.dot(&dxn);
            let lin: F = gy.iter().flatten().zip(xn.iter().flatten().zip(yk.iter().flatten())).fold(F::zero(), |s, (&g, (&a, &b))| s + g * (a - b));
            let bound = sy + lin + F::lit(0.5) * lip * dist2(&xn, &yk);
            if smooth(&dxn, &gdxn) <= bound + F::epsilon() * F::lit(10.0) * bound.abs().max(F::one()) {
                break (xn, dxn, gdxn);
            }
            lip = lip * F::lit(2.0);
        };

        let gx = block_grad(&gdxn);
        let mut worst = F::zero();
        for bi in 0..blocks.len() {
            worst = worst.max(group_residual(&gx[bi], &xn[bi], pens[bi], scales[bi]).1);
        }
        if worst <= tol {
            return xn;
        }

        // Gradient-based restart of the momentum.
        let restart: F = yk.iter().flatten().zip(xn.iter().flatten().zip(x.iter().flatten())).fold(F::zero(), |s, (&a, (&b, &c))| s + (a - b) * (b - c));
        let (mom, t_next) = if restart > F::zero() {
            (F::zero(), F::one())
        } else {
            let t_next = (F::one() + (F::one() + F::lit(4.0) * tk * tk).sqrt()) / F::lit(2.0);
            ((tk - F::one()) / t_next, t_next)
        };
        yk = xn.iter().zip(&x).map(|(a, b)| a.iter().zip(b).map(|(&u, &v)| u + mom * (u - v)).collect()).collect();
        dy = &dxn + &((&dxn - &dx) * mom);
        gdy = &gdxn + &((&gdxn - &gdx) * mom);
        x = xn;
        dx = dxn;
        gdx = gdxn;
        tk = t_next;
    }
    log::debug!("fista reached the iteration limit");
    x
}

pub(super) fn fit_path<F: Float>(
    u: &Array2<F>,
    y: ArrayView1<F>,
    group_cols: Vec<Vec<usize>>,
    weights: Vec<F>,
    lambdas: &LambdaGrid<F>,
    opts: &SolverOptions<F>,
) -> Result<GroupLassoPath<F>> {
    if u.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} rows in X, {} outcomes", u.nrows(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("no rows".into()));
    }
    if y.iter().any(|&v| v != F::zero() && v != F::one()) {
        return Err(Error::NonBinaryOutcome);
    }
    let mut cols = vec![vec![0]];
    cols.extend(group_cols);
    let mut weight = vec![F::zero()];
    weight.extend(weights);
    let mut prob = Problem { u, y, cols, weight, scale: F::one() };
    let ng = prob.n_groups();

    let null = prob.null_state();
    let grad0 = prob.full_gradient(&null.eta);
    let lmax = (1..ng).map(|k| norm(prob.gather(&grad0, k)) / prob.weight[k]).fold(F::zero(), F::max);
    if lmax > F::zero() {
        prob.scale = lmax;
    }
    let prob = prob;
    let group_norm = |grad: &Array1<F>, k: usize| norm(prob.gather(grad, k));

    let grid = match lambdas {
        LambdaGrid::Given(l) => l.clone(),
        LambdaGrid::Auto { n_lambda, eps_ratio } => {
            let eps = eps_ratio.unwrap_or(F::lit(DEFAULT_EPS_RATIO));
            if *n_lambda == 1 || lmax <= F::zero() {
                vec![lmax]
            } else {
                default_lambda_path(lmax, *n_lambda, eps)
            }
        }
    };
    if grid.windows(2).any(|w| w[1] >= w[0]) || grid.iter().any(|l| !l.is_finite() || *l < F::zero()) {
        return Err(Error::InvalidInput("lambda path must be finite and strictly descending".into()));
    }

    let mut st = null.clone();
    let mut grad = grad0.clone();
    let mut prev_lambda = lmax;
    let mut entries = Vec::with_capacity(grid.len());
    for &lambda in &grid {
        let mut trace = Vec::new();
        let converged = if lambda >= lmax {
            st = null.clone();
            grad = grad0.clone();
            true
        } else {
            // Sequential strong rule, then grow the working set on violations.
            let cut = F::lit(2.0) * lambda - prev_lambda;
            let mut in_ws = vec![false; ng];
            in_ws[0] = true;
            for k in 1..ng {
                if st.coef[k].iter().any(|&v| v != F::zero()) || group_norm(&grad, k) > prob.weight[k] * cut {
                    in_ws[k] = true;
                }
            }
            loop {
                let ws: Vec<usize> = (0..ng).filter(|&k| in_ws[k]).collect();
                let ok = prob.solve_ws(&mut st, lambda, &ws, opts, &mut trace)?;
                grad = prob.full_gradient(&st.eta);
                let mut added = false;
                for k in 1..ng {
                    if !in_ws[k] && group_norm(&grad, k) > lambda * prob.weight[k] {
                        in_ws[k] = true;
                        added = true;
                    }
                }
                if !added {
                    break ok && prob.report(&grad, &st, lambda).passes(opts.tol);
                }
            }
        };
        if !converged {
            log::warn!("glinternet did not reach tolerance at lambda = {lambda}");
        }
        prev_lambda = lambda;
        entries.push(GroupPathEntry {
            lambda,
            intercept: st.coef[0][0],
            groups: (1..ng)
                .filter(|&k| st.coef[k].iter().any(|&v| v != F::zero()))
                .map(|k| (k - 1, st.coef[k].clone()))
                .collect(),
            deviance: F::lit(2.0) * mean_log_loss(st.eta.view(), y),
            converged,
            objective_trace: trace,
        });
    }
    Ok(GroupLassoPath { entries, lambda_max: lmax })
}

/// Checks one path entry against its group stationarity conditions on the
/// training data `x` (feature scale, before design expansion).
pub fn group_kkt_check<F: Float>(model: &GlinternetModel<F>, idx: usize, x: ArrayView2<F>, y: ArrayView1<F>) -> Result<GroupKktReport<F>> {
    let u = model.design.matrix(x)?;
    let mut cols = vec![vec![0]];
    cols.extend(model.design.group_columns());
    let mut weight = vec![F::zero()];
    weight.extend(model.structure().weights.iter().map(|&w| F::lit(w)));
    let lmax = model.path.lambda_max;
    let scale = if lmax > F::zero() { lmax } else { F::one() };
    let prob = Problem { u: &u, y, cols, weight, scale };
    let e = &model.path.entries[idx];
    let mut coef: Vec<Vec<F>> = prob.cols.iter().map(|c| vec![F::zero(); c.len()]).collect();
    coef[0][0] = e.intercept;
    for (g, c) in &e.groups {
        coef[g + 1].clone_from(c);
    }
    let eta = u.dot(&model.composite(idx));
    let grad = prob.full_gradient(&eta);
    Ok(prob.report(&grad, &State { coef, eta }, e.lambda))
}
