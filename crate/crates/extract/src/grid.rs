use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use bellops::{bell_operator_sym4, lipschitz_constants, AnglePair, BellFunctional};
use matqm::Sym4;
use rayon::prelude::*;
use sdpcore::{certifies_at_least, solve_fab_with, FabProblem, FabSolution, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::curve::{CurveMeta, ExtractabilityCurve, KnotDetail, FLOOR};
use crate::ExtractError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyMode {
    /// Cells of width 2δ around each grid point: m = δ(c₀ + c₁).
    Paper,
    /// Nearest-grid-point cells of width δ: m = (δ/2)(c₀ + c₁).
    Tight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub delta: f64,
    pub mode: PenaltyMode,
    pub omega_knots: Vec<f64>,
}

impl GridSpec {
    pub fn new(delta: f64, mode: PenaltyMode, omega_knots: Vec<f64>) -> Self {
        GridSpec { delta, mode, omega_knots }
    }

    fn validate(&self, f: &BellFunctional) -> Result<(), ExtractError> {
        if !(self.delta > 0.0 && self.delta <= FRAC_PI_4) {
            return Err(ExtractError::BadSpacing(self.delta));
        }
        if self.omega_knots.is_empty() {
            return Err(ExtractError::NoKnots);
        }
        if self.omega_knots.iter().any(|w| !w.is_finite()) || self.omega_knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ExtractError::KnotsNotAscending);
        }
        let b = f.bounds();
        let slack = 1e-12 * b.eta_q_max.abs().max(1.0);
        for &omega in &self.omega_knots {
            if omega < b.eta_q_min - slack || omega > b.eta_q_max + slack {
                return Err(ExtractError::KnotOutOfRange { omega, lo: b.eta_q_min, hi: b.eta_q_max });
            }
        }
        Ok(())
    }
}

/// `count` evenly spaced knots over [η_L_max, η_Q_max].
pub fn default_knots(f: &BellFunctional, count: usize) -> Vec<f64> {
    let b = f.bounds();
    if count <= 1 {
        return vec![b.eta_q_max];
    }
    (0..count).map(|i| b.eta_l_max + (b.eta_q_max - b.eta_l_max) * i as f64 / (count - 1) as f64).collect()
}

/// Grid coordinates {iδ < π/2} ∪ {π/2}. Halving δ gives a superset.
pub fn grid_axis(delta: f64) -> Vec<f64> {
    let mut axis: Vec<f64> = (0..).map(|i| i as f64 * delta).take_while(|&x| x < FRAC_PI_2 - 1e-12).collect();
    axis.push(FRAC_PI_2);
    axis
}

/// Inclusion margin and Bell-value penalty m(δ).
pub fn penalty(f: &BellFunctional, delta: f64, mode: PenaltyMode) -> f64 {
    let (c0, c1) = lipschitz_constants(f);
    match mode {
        PenaltyMode::Paper => delta * (c0 + c1),
        PenaltyMode::Tight => 0.5 * delta * (c0 + c1),
    }
}

/// Every grid point with its Bell operator and largest eigenvalue.
pub struct Grid {
    delta: f64,
    side: usize,
    axis: Vec<f64>,
    ops: Vec<Sym4>,
    lmax: Vec<f64>,
}

impl Grid {
    pub fn new(f: &BellFunctional, delta: f64) -> Result<Self, ExtractError> {
        if !(delta > 0.0 && delta <= FRAC_PI_4) {
            return Err(ExtractError::BadSpacing(delta));
        }
        let axis = grid_axis(delta);
        let side = axis.len();
        let cells: Vec<(usize, usize)> = (0..side).flat_map(|i| (0..side).map(move |j| (i, j))).collect();
        let ops: Vec<Sym4> =
            cells.par_iter().map(|&(i, j)| bell_operator_sym4(f, AnglePair::clamped(axis[i], axis[j]))).collect();
        let lmax = ops.par_iter().map(|op| op.max_eigenvalue()).collect::<Result<Vec<_>, _>>()?;
        Ok(Grid { delta, side, axis, ops, lmax })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn angles(&self, cell: usize) -> AnglePair {
        AnglePair::clamped(self.axis[cell / self.side], self.axis[cell % self.side])
    }

    pub fn operator(&self, cell: usize) -> &Sym4 {
        &self.ops[cell]
    }

    pub fn lambda_max(&self, cell: usize) -> f64 {
        self.lmax[cell]
    }

    /// Cells whose operator reaches `target` (up to eigenvalue roundoff).
    fn included(&self, cell: usize, target: f64) -> bool {
        self.lmax[cell] >= target - 1e-12
    }
}

/// Grid points whose cell can contain angles reaching ω.
pub fn feasible_cells(f: &BellFunctional, omega: f64, g: &GridSpec) -> Result<Vec<AnglePair>, ExtractError> {
    let grid = Grid::new(f, g.delta)?;
    let target = omega - penalty(f, g.delta, g.mode);
    Ok((0..grid.len()).filter(|&c| grid.included(c, target)).map(|c| grid.angles(c)).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Side of the square blocks, in radians, sharing one representative solve.
    pub block_radians: f64,
    pub solver: SolverOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { block_radians: 0.04, solver: SolverOptions::default() }
    }
}

/// Result of the minimization at one knot.
#[derive(Debug, Clone)]
pub struct KnotMinimum {
    pub omega: f64,
    pub penalized_omega: f64,
    /// Certified minimum over included cells, before the floor; None when
    /// no cell is included.
    pub minimum: Option<f64>,
    pub argmin: Option<AnglePair>,
    /// Dual solution and problem at the arg-min cell.
    pub witness: Option<(FabProblem, FabSolution)>,
    pub cells: usize,
    pub solves: usize,
    pub pruned: usize,
    /// True when the search stopped as soon as the floor was certain.
    pub floor_exit: bool,
}

struct CellSolve {
    cell: usize,
    problem: FabProblem,
    sol: FabSolution,
}

fn solve_cell(grid: &Grid, cell: usize, target: f64, opts: &SolverOptions) -> Result<CellSolve, ExtractError> {
    // Cells within roundoff of the target are solved at their own maximum;
    // a smaller ω can only lower the bound.
    let omega = target.min(grid.lambda_max(cell));
    let problem = FabProblem::from_sym4(*grid.operator(cell), omega);
    let sol = solve_fab_with(&problem, opts)?;
    Ok(CellSolve { cell, problem, sol })
}

/// Deterministic minimum over included cells at ω − m(δ).
///
/// Cells are split into square blocks. Each block's representative (the
/// included cell with the largest λ_max) is solved first, and the smallest
/// representative value v₀ is fixed. A remaining cell is skipped when the
/// representative's dual point, carried over to that cell, already
/// certifies at least v₀; it cannot lower the minimum. Every other cell is
/// solved. If v₀ ≤ 1/2 the floor decides the knot and the sweep stops.
pub fn knot_minimum(
    f: &BellFunctional,
    grid: &Grid,
    omega: f64,
    mode: PenaltyMode,
    opts: &SweepOptions,
) -> Result<KnotMinimum, ExtractError> {
    let delta = grid.delta;
    let target = omega - penalty(f, delta, mode);
    let side = grid.side;
    let bsize = ((opts.block_radians / delta).round() as usize).clamp(1, side);
    let nb = side.div_ceil(bsize);

    let blocks: Vec<Vec<usize>> = (0..nb * nb)
        .map(|b| {
            let (bi, bj) = (b / nb, b % nb);
            let mut cells = Vec::new();
            for i in bi * bsize..((bi + 1) * bsize).min(side) {
                for j in bj * bsize..((bj + 1) * bsize).min(side) {
                    let c = i * side + j;
                    if grid.included(c, target) {
                        cells.push(c);
                    }
                }
            }
            cells
        })
        .filter(|cells| !cells.is_empty())
        .collect();
    let cells: usize = blocks.iter().map(Vec::len).sum();
    let empty = KnotMinimum {
        omega,
        penalized_omega: target,
        minimum: None,
        argmin: None,
        witness: None,
        cells: 0,
        solves: 0,
        pruned: 0,
        floor_exit: false,
    };
    if cells == 0 {
        return Ok(empty);
    }

    let reps: Vec<CellSolve> = blocks
        .par_iter()
        .map(|cells| {
            let rep = *cells
                .iter()
                .max_by(|&&a, &&b| grid.lambda_max(a).total_cmp(&grid.lambda_max(b)).then(b.cmp(&a)))
                .expect("non-empty block");
            solve_cell(grid, rep, target, &opts.solver)
        })
        .collect::<Result<_, _>>()?;
    let v0 = reps.iter().map(|r| r.sol.value).fold(f64::INFINITY, f64::min);

    let mut solved: Vec<CellSolve> = Vec::new();
    let mut pruned = 0;
    let floor_exit = v0 <= FLOOR;
    if !floor_exit {
        let rest: Vec<(Vec<CellSolve>, usize)> = blocks
            .par_iter()
            .zip(reps.par_iter())
            .map(|(cells, rep)| {
                let mut out = Vec::new();
                let mut skipped = 0;
                for &c in cells {
                    if c == rep.cell {
                        continue;
                    }
                    let w = target.min(grid.lambda_max(c));
                    if certifies_at_least(&rep.sol, grid.operator(c), w, v0) {
                        skipped += 1;
                    } else {
                        out.push(solve_cell(grid, c, target, &opts.solver)?);
                    }
                }
                Ok::<_, ExtractError>((out, skipped))
            })
            .collect::<Result<_, _>>()?;
        for (out, skipped) in rest {
            pruned += skipped;
            solved.extend(out);
        }
    }
    let solves = reps.len() + solved.len();
    let best = reps
        .into_iter()
        .chain(solved)
        .min_by(|x, y| x.sol.value.total_cmp(&y.sol.value).then(x.cell.cmp(&y.cell)))
        .expect("at least one solve");
    Ok(KnotMinimum {
        minimum: Some(best.sol.value),
        argmin: Some(grid.angles(best.cell)),
        witness: Some((best.problem, best.sol)),
        cells,
        solves,
        pruned,
        floor_exit,
        ..empty
    })
}

pub fn xi_lower_bound(f: &BellFunctional, g: &GridSpec) -> Result<ExtractabilityCurve, ExtractError> {
    xi_lower_bound_with(f, g, &SweepOptions::default())
}

pub fn xi_lower_bound_with(
    f: &BellFunctional,
    g: &GridSpec,
    opts: &SweepOptions,
) -> Result<ExtractabilityCurve, ExtractError> {
    g.validate(f)?;
    let m = penalty(f, g.delta, g.mode);
    let b = f.bounds();
    if m >= b.eta_q_max - b.eta_l_max {
        log::warn!("penalty {m:.4} exceeds the quantum range above the local bound; the curve will be trivial");
    }
    let grid = Grid::new(f, g.delta)?;
    let mut details = Vec::with_capacity(g.omega_knots.len());
    for &omega in &g.omega_knots {
        let km = knot_minimum(f, &grid, omega, g.mode, opts)?;
        log::debug!(
            "knot {omega:.6}: cells {} solves {} pruned {} min {:?}",
            km.cells,
            km.solves,
            km.pruned,
            km.minimum
        );
        match km.minimum {
            Some(v) => details.push(KnotDetail { clamped: v.clamp(FLOOR, 1.0), result: km }),
            None => log::info!("dropping knot {omega}: no included cell"),
        }
    }
    if details.is_empty() {
        return Err(ExtractError::AllKnotsInfeasible);
    }
    let meta = CurveMeta { delta: g.delta, mode: g.mode, penalty: m, floor: FLOOR };
    ExtractabilityCurve::from_knot_details(f.id(), b.eta_q_min, details, meta)
}
