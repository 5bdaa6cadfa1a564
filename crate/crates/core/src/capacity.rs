//! Discretised Orlicz capacities, capacity conditions on measures, and
//! probes of the Wolff/capacity equivalences.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, CellGrid};
use crate::measure::Measure;
use crate::params::Params;
use crate::potential::{frac_max, wolff, ConvolutionKernel};
use crate::quadrature::{integrate_dt_over_t, unit_sphere_area};
use crate::special::{q_p_eval, ConjugateTable, ReactionSpec};

/// A compact test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TestSet {
    Ball { x: Vec<f64>, r: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

/// `{"balls": [{"x": [..], "r": ..}], "boxes": [{"lo": [..], "hi": [..]}]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SetSpec {
    pub balls: Vec<BallSet>,
    pub boxes: Vec<BoxSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSet {
    pub x: Vec<f64>,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSet {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SetSpec {
    pub fn sets(&self) -> Vec<TestSet> {
        self.balls
            .iter()
            .map(|b| TestSet::Ball { x: b.x.clone(), r: b.r })
            .chain(self.boxes.iter().map(|b| TestSet::Box { lo: b.lo.clone(), hi: b.hi.clone() }))
            .collect()
    }
}

impl TestSet {
    pub fn validate(&self) -> Result<()> {
        match self {
            TestSet::Ball { x, r } if x.is_empty() || !(*r > 0.0) => Err(invalid("test ball needs a centre and r > 0")),
            TestSet::Box { lo, hi } if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(b > a)) => {
                Err(invalid("test box needs lo < hi componentwise"))
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            TestSet::Ball { x, r } => dist(x, y) <= r * (1.0 + 1e-12),
            TestSet::Box { lo, hi } => y.iter().zip(lo.iter().zip(hi)).all(|(c, (a, b))| *c >= *a - 1e-12 && *c <= *b + 1e-12),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            TestSet::Ball { x, .. } => x.clone(),
            TestSet::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            TestSet::Ball { r, .. } => 2.0 * r,
            TestSet::Box { lo, hi } => dist(lo, hi),
        }
    }

    /// Measure of the set; cells and atoms are included by their centres.
    pub fn mass(&self, m: &Measure) -> f64 {
        let atoms: f64 = m.atoms().iter().filter(|a| self.contains(&a.x)).map(|a| a.mass.abs()).sum();
        let dens = m.density().map_or(0.0, |d| {
            let vol = d.grid.cell_volume();
            let mut c = vec![0.0; d.grid.dim()];
            let mut acc = 0.0;
            for (i, &v) in d.values.iter().enumerate() {
                d.grid.center_into(i, &mut c);
                if self.contains(&c) {
                    acc += v.abs() * vol;
                }
            }
            acc
        });
        atoms + dens
    }
}

/// The integrand `P` of a capacity.
#[derive(Debug, Clone)]
pub enum Integrand {
    /// `P(t) = t^q`, `q > 1`.
    Power(f64),
    /// `P = Q_p*`, tabulated; the conjugate `Q_p` is evaluated by its series.
    Conjugate { reaction: ReactionSpec, params: Params, table: ConjugateTable },
}

impl Integrand {
    pub fn power(q: f64) -> Result<Self> {
        if q > 1.0 && q.is_finite() {
            Ok(Integrand::Power(q))
        } else {
            Err(invalid(format!("power integrand needs q > 1, got {q}")))
        }
    }

    pub fn conjugate(reaction: ReactionSpec, params: Params, t_max: f64) -> Result<Self> {
        reaction.validate(&params)?;
        let table = ConjugateTable::new(&reaction, &params, t_max, 400)?;
        Ok(Integrand::Conjugate { reaction, params, table })
    }

    fn value(&self, t: f64) -> f64 {
        match self {
            Integrand::Power(q) => t.max(0.0).powf(*q),
            Integrand::Conjugate { table, .. } => table.eval(t),
        }
    }

    /// `P*(s)` for `s >= 0`.
    fn dual(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self {
            Integrand::Power(q) => (q - 1.0) * (s / q).powf(q / (q - 1.0)),
            Integrand::Conjugate { reaction, params, .. } => q_p_eval(reaction, params, s).unwrap_or(f64::INFINITY),
        }
    }

    /// `(P*)'(s)`, the primal density paired with the dual variable `s`.
    fn dual_slope(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self {
            Integrand::Power(q) => (s / q).powf(1.0 / (q - 1.0)),
            Integrand::Conjugate { .. } => {
                if s == 0.0 {
                    return 0.0;
                }
                let d = 1e-6 * s;
                (self.dual(s + d) - self.dual(s - d)) / (2.0 * d)
            }
        }
    }
}

/// Discretised capacity problem: minimise `Σ P(f_j) h^n` over `f >= 0` on
/// the cells of `grid` subject to `(G * f)(e) >= 1` at every target node.
#[derive(Debug, Clone)]
pub struct CapacityProblem {
    kernel: ConvolutionKernel,
    integrand: Integrand,
    grid: CellGrid,
    targets: Vec<usize>,
    table: Vec<f64>,
}

impl CapacityProblem {
    pub fn new(kernel: ConvolutionKernel, integrand: Integrand, grid: CellGrid, targets: Vec<usize>) -> Result<Self> {
        let n = grid.dim();
        kernel.validate(n)?;
        if targets.is_empty() {
            return Err(invalid("capacity target set is empty"));
        }
        if targets.iter().any(|&t| t >= grid.len()) {
            return Err(Error::LatticeMismatch("target node outside the grid".into()));
        }
        // G * χ_cell depends only on the offset between target and cell.
        let tshape: Vec<usize> = grid.shape.iter().map(|m| 2 * m - 1).collect();
        let len: usize = tshape.iter().product();
        let zero = vec![0.0; n];
        let mut c = vec![0.0; n];
        let table = (0..len)
            .map(|t| {
                let mut r = t;
                for m in (0..n).rev() {
                    c[m] = ((r % tshape[m]) as f64 - (grid.shape[m] as f64 - 1.0)) * grid.h;
                    r /= tshape[m];
                }
                kernel.cell_integral(&zero, &c, grid.h, 1e-9)
            })
            .collect();
        Ok(CapacityProblem { kernel, integrand, grid, targets, table })
    }

    /// Targets are the nodes of `grid` inside `set`.
    pub fn on_grid(kernel: ConvolutionKernel, integrand: Integrand, grid: CellGrid, set: &TestSet) -> Result<Self> {
        set.validate()?;
        let targets: Vec<usize> = (0..grid.len()).filter(|&i| set.contains(&grid.center(i))).collect();
        CapacityProblem::new(kernel, integrand, grid, targets)
    }

    /// Grid centred on the set with `cells_per_radius` cells per half
    /// diameter, covering a box three times the diameter.
    pub fn for_set(kernel: ConvolutionKernel, integrand: Integrand, set: &TestSet, cells_per_radius: usize) -> Result<Self> {
        set.validate()?;
        if cells_per_radius < 2 {
            return Err(invalid("need at least 2 cells per radius"));
        }
        let half = 0.5 * set.diameter();
        let h = half / cells_per_radius as f64;
        let per_axis = 6 * cells_per_radius + 1;
        let c = set.center();
        let origin: Vec<f64> = c.iter().map(|x| x - (3 * cells_per_radius) as f64 * h).collect();
        let grid = CellGrid::new(origin, h, vec![per_axis; c.len()])?;
        CapacityProblem::on_grid(kernel, integrand, grid, set)
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn kernel(&self) -> ConvolutionKernel {
        self.kernel
    }

    fn offset(&self, target: usize, cell: usize) -> usize {
        let a = self.grid.multi_index(target);
        let b = self.grid.multi_index(cell);
        let mut idx = 0;
        for m in 0..a.len() {
            let t = 2 * self.grid.shape[m] - 1;
            idx = idx * t + (b[m] + self.grid.shape[m] - 1 - a[m]);
        }
        idx
    }

    /// Dense constraint matrix rows, one per target.
    fn matrix(&self) -> Vec<Vec<f64>> {
        self.targets
            .iter()
            .map(|&e| (0..self.grid.len()).map(|j| self.table[self.offset(e, j)]).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Best feasible primal value.
    pub value: f64,
    /// Best dual lower bound.
    pub dual_bound: f64,
    pub iterations: usize,
    /// Relative gap below the requested tolerance.
    pub certified: bool,
    #[serde(skip)]
    pub density: Vec<f64>,
}

/// Solves the dual `max_{λ>=0} Σ λ_e - Σ h^n P*((A^T λ)_j / h^n)` by
/// multiplicative updates `λ_e ← λ_e (A f)_e^{-θ}` with step control on the
/// dual value; primal iterates `f = (P*)'(A^T λ / h^n)` are made feasible
/// by scaling.
pub fn orlicz_capacity(cp: &CapacityProblem, tol: f64) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(invalid("capacity tolerance must be positive"));
    }
    let a = cp.matrix();
    let m = a.len();
    let cells = cp.grid.len();
    let vol = cp.grid.cell_volume();
    let integrand = &cp.integrand;
    let primal_of = |lambda: &[f64], f: &mut Vec<f64>| {
        let mut s = vec![0.0; cells];
        for (row, &l) in a.iter().zip(lambda) {
            for (sj, aj) in s.iter_mut().zip(row) {
                *sj += l * aj;
            }
        }
        let dual_part: f64 = s.iter().map(|&v| integrand.dual(v / vol)).sum::<f64>() * vol;
        f.clear();
        f.extend(s.iter().map(|&v| integrand.dual_slope(v / vol)));
        dual_part
    };
    let apply = |f: &[f64]| a.iter().map(|row| row.iter().zip(f).map(|(x, y)| x * y).sum::<f64>()).collect::<Vec<f64>>();
    let objective = |f: &[f64]| f.iter().map(|&v| integrand.value(v)).sum::<f64>() * vol;

    // Scale a uniform start so that the constraints hold on average.
    let mut lambda = vec![1.0; m];
    let mut f = Vec::with_capacity(cells);
    for _ in 0..60 {
        primal_of(&lambda, &mut f);
        let af = apply(&f);
        let mean = af.iter().sum::<f64>() / m as f64;
        if (mean - 1.0).abs() < 1e-3 {
            break;
        }
        let factor = if mean > 0.0 { (1.0 / mean).clamp(1e-3, 1e3) } else { 1e3 };
        for l in lambda.iter_mut() {
            *l *= factor;
        }
    }
    let exponent = match integrand {
        Integrand::Power(q) => q - 1.0,
        Integrand::Conjugate { .. } => 0.5,
    };
    let mut theta: f64 = 1.0;
    let mut best_primal = f64::INFINITY;
    let mut best_dual = f64::NEG_INFINITY;
    let mut best_f = Vec::new();
    let mut dual_cur = f64::NEG_INFINITY;
    let mut iterations = 0;
    while iterations < 10_000 {
        iterations += 1;
        let dual_part = primal_of(&lambda, &mut f);
        let dual = lambda.iter().sum::<f64>() - dual_part;
        let af = apply(&f);
        let min_af = af.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_af > 0.0 {
            let scaled: Vec<f64> = f.iter().map(|v| v / min_af).collect();
            let val = objective(&scaled);
            if val < best_primal {
                best_primal = val;
                best_f = scaled;
            }
        }
        if dual > best_dual {
            best_dual = dual;
        }
        if best_primal.is_finite() && best_primal - best_dual <= tol * best_primal {
            break;
        }
        if dual < dual_cur {
            theta *= 0.5;
        } else {
            theta = (theta * 1.1).min(1.0);
        }
        dual_cur = dual_cur.max(dual);
        for (l, &v) in lambda.iter_mut().zip(&af) {
            let ratio = if v > 0.0 { v } else { 1e-12 };
            *l *= ratio.powf(-theta * exponent);
            *l = l.max(1e-300);
        }
    }
    Ok(CapacityResult {
        value: best_primal,
        dual_bound: best_dual,
        iterations,
        certified: best_primal - best_dual <= tol * best_primal,
        density: best_f,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub set: TestSet,
    pub mass: f64,
    pub capacity: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub delta: f64,
    pub entries: Vec<ConditionEntry>,
    pub max_ratio: f64,
    pub passes: bool,
}

/// `μ(K) <= δ Cap(K)` on each test set, with capacities computed on a
/// per-set grid of `cells_per_radius` resolution.
pub fn capacity_condition(
    m: &Measure,
    kernel: ConvolutionKernel,
    integrand: &Integrand,
    sets: &[TestSet],
    delta: f64,
    cells_per_radius: usize,
    tol: f64,
) -> Result<ConditionReport> {
    let mut entries = Vec::new();
    for set in sets {
        let mass = set.mass(m);
        let capacity = if mass == 0.0 {
            f64::NAN
        } else {
            let cp = CapacityProblem::for_set(kernel, integrand.clone(), set, cells_per_radius)?;
            orlicz_capacity(&cp, tol)?.value
        };
        let ratio = if mass == 0.0 { 0.0 } else { mass / capacity };
        entries.push(ConditionEntry { set: set.clone(), mass, capacity, ratio });
    }
    let max_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    Ok(ConditionReport { delta, entries, max_ratio, passes: max_ratio <= delta })
}

/// `sup_x M^η_{sp,T}[μ](x)` over `points` with `η = (p-1)(β-1)/β`; points
/// carrying an atom are skipped.
pub fn maximal_smallness(m: &Measure, prm: &Params, beta: f64, t: f64, points: &[Vec<f64>]) -> Result<f64> {
    if !(beta >= 1.0) {
        return Err(invalid(format!("beta = {beta} must be at least 1")));
    }
    let eta = (prm.p() - 1.0) * (beta - 1.0) / beta;
    let mut sup: f64 = 0.0;
    for x in points {
        if m.atoms().iter().any(|a| a.mass != 0.0 && dist(&a.x, x) == 0.0) {
            continue;
        }
        sup = sup.max(frac_max(m, x, prm.n(), prm.sp(), eta, t)?);
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivEntry {
    pub set: TestSet,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivReport {
    pub radius: f64,
    pub gamma: f64,
    /// `∫_K (W^{4R}[μ])^γ` against `Cap(K)`.
    pub compacts: Vec<EquivEntry>,
    /// `∫ (W^{4R}[χ_B μ])^γ` against `μ(B)`.
    pub balls: Vec<EquivEntry>,
    pub spread_compacts: Option<f64>,
    pub spread_balls: Option<f64>,
}

/// `∫ (W^T[ν])^γ dx`: radial for a single atom, else the cell-centre rule on
/// `grid` (cells where the potential is infinite are dropped).
fn wolff_power_integral(nu: &Measure, prm: &Params, t: f64, gamma: f64, grid: &CellGrid, within: Option<&TestSet>) -> Result<f64> {
    let single_atom = nu.density().is_none() && nu.atoms().iter().filter(|a| a.mass != 0.0).count() == 1;
    if single_atom && within.is_none() {
        let a = nu.atoms().iter().find(|a| a.mass != 0.0).expect("one atom");
        let n = prm.n();
        let e = prm.dim() - prm.sp();
        let kappa = 1.0 / (prm.p() - 1.0);
        // W(ρ) = |m|^κ ∫_ρ^T t^{-eκ} dt/t.
        let w = |rho: f64| a.mass.abs().powf(kappa) * (rho.powf(-e * kappa) - t.powf(-e * kappa)) / (e * kappa);
        let g = |rho: f64| w(rho).powf(gamma) * rho.powi(n as i32);
        return Ok(unit_sphere_area(n) * integrate_dt_over_t(g, t * 1e-12, t, 1e-9, 0.0));
    }
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let c = grid.center(i);
        if within.is_some_and(|k| !k.contains(&c)) {
            continue;
        }
        let w = wolff(nu, &c, prm, t, 1e-8)?;
        if w.is_finite() {
            acc += w.powf(gamma) * vol;
        }
    }
    Ok(acc)
}

fn spread(entries: &[EquivEntry]) -> Option<f64> {
    let ratios: Vec<f64> = entries.iter().map(|e| e.ratio).filter(|r| r.is_finite() && *r > 0.0).collect();
    if ratios.is_empty() {
        return None;
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    Some(hi / lo)
}

/// Implied constants of the two integral characterisations of the capacity
/// condition, with `T = 4R` and the Bessel capacity of order `sp` and
/// exponent `γ/(γ-p+1)`.
#[allow(clippy::too_many_arguments)]
pub fn wolff_capacity_equiv_probe(
    m: &Measure,
    gamma: f64,
    prm: &Params,
    radius: f64,
    compacts: &[TestSet],
    balls: &[(Vec<f64>, f64)],
    grid: &CellGrid,
    cells_per_radius: usize,
) -> Result<EquivReport> {
    if !(gamma > prm.p() - 1.0) {
        return Err(invalid("gamma must exceed p - 1"));
    }
    if !(radius > 1.0) {
        return Err(invalid("support radius R must exceed 1"));
    }
    if m.support_radius(&vec![0.0; prm.n()]) > radius {
        return Err(invalid("measure must be supported in B_R(0)"));
    }
    let t = 4.0 * radius;
    let q = gamma / (gamma - prm.p() + 1.0);
    let kernel = ConvolutionKernel::Bessel(prm.sp());
    let integrand = Integrand::power(q)?;
    let mut rep = EquivReport { radius, gamma, compacts: Vec::new(), balls: Vec::new(), spread_compacts: None, spread_balls: None };
    if m.is_zero() {
        return Ok(rep);
    }
    for k in compacts {
        let lhs = wolff_power_integral(m, prm, t, gamma, grid, Some(k))?;
        let cp = CapacityProblem::for_set(kernel, integrand.clone(), k, cells_per_radius)?;
        let rhs = orlicz_capacity(&cp, 1e-3)?.value;
        rep.compacts.push(EquivEntry { set: k.clone(), lhs, rhs, ratio: lhs / rhs });
    }
    for (x, r) in balls {
        let nu = m.restrict_to_ball(x, *r);
        let rhs = nu.total_variation();
        if rhs == 0.0 {
            continue;
        }
        let lhs = wolff_power_integral(&nu, prm, t, gamma, grid, None)?;
        rep.balls.push(EquivEntry { set: TestSet::Ball { x: x.clone(), r: *r }, lhs, rhs, ratio: lhs / rhs });
    }
    rep.spread_compacts = spread(&rep.compacts);
    rep.spread_balls = spread(&rep.balls);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(r: f64) -> TestSet {
        TestSet::Ball { x: vec![0.0, 0.0], r }
    }

    #[test]
    fn power_dual_is_conjugate() {
        let p = Integrand::power(1.5).unwrap();
        for s in [0.1, 1.0, 3.0] {
            let t = p.dual_slope(s);
            // Fenchel equality at the paired point.
            assert!((p.dual(s) - (s * t - p.value(t))).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_capacity_scaling() {
        let kernel = ConvolutionKernel::Riesz(1.0);
        let q = 1.5;
        let radii = [0.1, 0.2, 0.4, 0.8];
        let caps: Vec<f64> = radii
            .iter()
            .map(|&r| {
                let cp = CapacityProblem::for_set(kernel, Integrand::power(q).unwrap(), &ball(r), 4).unwrap();
                let res = orlicz_capacity(&cp, 1e-4).unwrap();
                assert!(res.value >= res.dual_bound - 1e-12);
                res.value
            })
            .collect();
        for w in caps.windows(2) {
            let slope = (w[1] / w[0]).ln() / 2f64.ln();
            assert!((slope - (2.0 - q)).abs() < 0.05 * (2.0 - q), "{slope}");
        }
    }

    #[test]
    fn monotone_and_subadditive() {
        let kernel = ConvolutionKernel::Riesz(1.0);
        let grid = CellGrid::new(vec![-1.0, -1.0], 0.1, vec![21, 21]).unwrap();
        let cap = |s: &TestSet| {
            let cp = CapacityProblem::on_grid(kernel, Integrand::power(1.5).unwrap(), grid.clone(), s).unwrap();
            orlicz_capacity(&cp, 1e-4).unwrap().value
        };
        let small = TestSet::Ball { x: vec![0.3, 0.0], r: 0.15 };
        let large = TestSet::Ball { x: vec![0.3, 0.0], r: 0.3 };
        assert!(cap(&small) <= cap(&large) * (1.0 + 1e-4));
        let other = TestSet::Ball { x: vec![-0.3, 0.0], r: 0.15 };
        let union = {
            let targets: Vec<usize> = (0..grid.len()).filter(|&i| small.contains(&grid.center(i)) || other.contains(&grid.center(i))).collect();
            let cp = CapacityProblem::new(kernel, Integrand::power(1.5).unwrap(), grid.clone(), targets).unwrap();
            orlicz_capacity(&cp, 1e-4).unwrap().value
        };
        assert!(union <= (cap(&small) + cap(&other)) * (1.0 + 1e-4));
    }

    #[test]
    fn smallness_examples() {
        let prm = Params::new(2, 0.5, 2.0, 1.0).unwrap();
        let pts: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.25, 0.0]];
        assert_eq!(maximal_smallness(&Measure::zero(), &prm, 2.0, 1.0, &pts).unwrap(), 0.0);
        let d = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        let v = maximal_smallness(&d, &prm, 1.0, 1.0, &pts).unwrap();
        assert_eq!(v, frac_max(&d, &[0.25, 0.0], 2, 1.0, 0.0, 1.0).unwrap());
        assert_eq!(v, 4.0);
        let v3 = maximal_smallness(&d.scaled(3.0), &prm, 1.0, 1.0, &pts).unwrap();
        assert!((v3 - 3.0 * v).abs() < 1e-12);
    }

    #[test]
    fn condition_examples() {
        let kernel = ConvolutionKernel::Riesz(1.0);
        let integ = Integrand::power(1.5).unwrap();
        let sets = vec![ball(0.2), ball(0.1)];
        let z = capacity_condition(&Measure::zero(), kernel, &integ, &sets, 1.0, 4, 1e-3).unwrap();
        assert!(z.passes && z.max_ratio == 0.0);
        // spq = 1.5 < 2: shrinking balls around an atom have vanishing capacity.
        let d = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        let shrinking: Vec<TestSet> = [0.4, 0.1, 0.025].iter().map(|&r| ball(r)).collect();
        let rep = capacity_condition(&d, kernel, &integ, &shrinking, 1.0, 4, 1e-3).unwrap();
        assert!(rep.entries.windows(2).all(|w| w[1].ratio > w[0].ratio));
        assert!(!rep.passes);
    }
}
