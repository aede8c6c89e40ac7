//! Alternating projections onto linear subspaces of `ℝ^d`.
//!
//! Each subspace is stored as a `d × r` matrix with orthonormal columns, so
//! its projector is `v ↦ Q Qᵀ v`. An order sequence picks the subspace for
//! every step: `ξ_n = P_{x_n}(ξ_{n−1})`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::stream_rng;
use crate::seqspace::{Symbol, SymbolicSequence};

/// Default rank tolerance for [`orthonormalize`].
pub const RANK_TOL: f64 = 1e-12;
/// Eigenvalues of the averaged projector at least `1 − INTERSECTION_TOL`
/// span the intersection.
pub const INTERSECTION_TOL: f64 = 1e-10;
/// Relative decrease below which a window of `10·N` steps counts as stalled.
pub const STAGNATION_REL: f64 = 1e-14;

/// Orthonormal basis of the span of `spanning` (vectors of length `dim`).
/// Modified Gram–Schmidt with one reorthogonalization pass; a direction is
/// dropped when its residual norm is at most `tol` times the largest input
/// norm.
pub fn orthonormalize(dim: usize, spanning: &[DVector<f64>], tol: f64) -> Result<DMatrix<f64>> {
    for v in spanning {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    let scale = spanning.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in spanning {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let norm = w.norm();
        if norm > tol * scale && norm > 0.0 {
            basis.push(w / norm);
        }
    }
    Ok(if basis.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&basis)
    })
}

/// `Q Qᵀ v`.
pub fn project(basis: &DMatrix<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    if basis.nrows() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.nrows(),
            found: v.len(),
        });
    }
    Ok(basis * (basis.transpose() * v))
}

/// `Q Qᵀ` as a dense matrix.
pub fn projector_matrix(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSystem {
    dim: usize,
    bases: Vec<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemJson {
    dim: usize,
    subspaces: Vec<Vec<Vec<f64>>>,
}

impl Serialize for SubspaceSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SystemJson {
            dim: self.dim,
            subspaces: self
                .bases
                .iter()
                .map(|q| {
                    q.column_iter()
                        .map(|c| c.iter().copied().collect())
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubspaceSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SystemJson::deserialize(d)?;
        let spans: Vec<Vec<DVector<f64>>> = raw
            .subspaces
            .into_iter()
            .map(|vs| vs.into_iter().map(DVector::from_vec).collect())
            .collect();
        SubspaceSystem::from_spanning(raw.dim, &spans, RANK_TOL).map_err(serde::de::Error::custom)
    }
}

impl SubspaceSystem {
    /// Orthonormalizes each spanning set.
    pub fn from_spanning(dim: usize, spans: &[Vec<DVector<f64>>], tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "ambient dimension must be positive".into(),
            ));
        }
        if spans.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let bases = spans
            .iter()
            .map(|s| orthonormalize(dim, s, tol))
            .collect::<Result<_>>()?;
        Ok(SubspaceSystem { dim, bases })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of subspaces `N`.
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Orthonormal basis of `C_n` (1-based).
    pub fn basis(&self, n: Symbol) -> Result<&DMatrix<f64>> {
        self.bases
            .get((n as usize).wrapping_sub(1))
            .ok_or(Error::IndexOutOfRange {
                index: n,
                size: self.bases.len() as u32,
            })
    }

    pub fn project(&self, n: Symbol, v: &DVector<f64>) -> Result<DVector<f64>> {
        project(self.basis(n)?, v)
    }

    /// Orthonormal basis of `C_1 ∩ … ∩ C_N`: the unit vectors `v` with
    /// `(1/N) Σ ‖(I − P_n) v‖² ≤ tol`, read off the right singular vectors of
    /// the stacked complements `I − P_n`.
    pub fn intersection_basis(&self, tol: f64) -> DMatrix<f64> {
        let d = self.dim;
        let n = self.bases.len();
        if n == 0 {
            return DMatrix::identity(d, d);
        }
        let mut stacked = DMatrix::zeros(n * d, d);
        for (i, q) in self.bases.iter().enumerate() {
            let complement = DMatrix::identity(d, d) - projector_matrix(q);
            stacked.view_mut((i * d, 0), (d, d)).copy_from(&complement);
        }
        let svd = stacked.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let cutoff = (n as f64 * tol).sqrt();
        let fixed: Vec<DVector<f64>> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= cutoff)
            .map(|(i, _)| v_t.row(i).transpose())
            .collect();
        orthonormalize(d, &fixed, RANK_TOL).expect("singular vectors have the ambient dimension")
    }

    /// `P_∩ v`.
    pub fn project_intersection(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        project(&self.intersection_basis(INTERSECTION_TOL), v)
    }

    /// A seeded random system: each `C_n` is spanned by `k_n` standard normal
    /// vectors with `k_n` uniform in `1..d` (`k_n = 1` when `d = 1`).
    pub fn random(dim: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, 0x4d41_5053);
        let spans: Vec<Vec<DVector<f64>>> = (0..n)
            .map(|_| {
                let k = if dim > 1 { rng.gen_range(1..dim) } else { 1 };
                (0..k)
                    .map(|_| DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal)))
                    .collect()
            })
            .collect();
        SubspaceSystem::from_spanning(dim, &spans, RANK_TOL)
    }
}

/// A seeded standard normal vector scaled to unit length.
pub fn random_unit_vector(dim: usize, seed: u64) -> DVector<f64> {
    let mut rng = stream_rng(seed, 0x0058_4930);
    let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        let mut e = DVector::zeros(dim);
        e[0] = 1.0;
        e
    }
}

// ---------------------------------------------------------------------------
// Trajectories

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub tol: f64,
    pub max_iters: usize,
    /// Log every `log_stride`-th step (the first and last steps are always logged).
    pub log_stride: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            tol: 1e-6,
            max_iters: 100_000,
            log_stride: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Converged { tol: f64 },
    IterationCap,
    Stagnated,
}

/// One logged step. `distance_to_current_set` is `‖ξ_{n−1} − P_{x_n} ξ_{n−1}‖`,
/// the length of the step taken (`0` at step `0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: usize,
    pub distance_to_target: f64,
    pub distance_to_current_set: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub log: Vec<LogEntry>,
    /// `ξ` at each logged step.
    pub iterates: Vec<DVector<f64>>,
    pub target: DVector<f64>,
    pub steps: usize,
    pub stop: StopReason,
    pub final_distance: f64,
    /// Largest increase of `‖ξ_n − P_∩ ξ_0‖` over one step (every step, not
    /// only logged ones).
    pub max_increase: f64,
    /// The order symbols applied, for replay.
    pub order_used: Vec<Symbol>,
}

impl Trajectory {
    pub fn last(&self) -> &DVector<f64> {
        self.iterates.last().expect("step 0 is always logged")
    }

    /// CSV with header `step,distance_to_target,distance_to_current_set`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,distance_to_target,distance_to_current_set\n");
        for e in &self.log {
            out.push_str(&format!(
                "{},{:e},{:e}\n",
                e.step, e.distance_to_target, e.distance_to_current_set
            ));
        }
        out
    }
}

/// Runs `ξ_n = P_{x_n}(ξ_{n−1})` until `‖ξ_n − P_∩ ξ_0‖ ≤ tol`, the
/// iteration cap, or stagnation.
pub fn run_map(
    system: &SubspaceSystem,
    order: &SymbolicSequence,
    xi0: &DVector<f64>,
    stop: StopRule,
) -> Result<Trajectory> {
    let n = system.len();
    if order.alphabet().size() as usize != n {
        return Err(Error::AlphabetMismatch {
            left: order.alphabet().size(),
            right: n as u32,
        });
    }
    if xi0.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: xi0.len(),
        });
    }
    let stride = stop.log_stride.max(1);
    let target = system.project_intersection(xi0)?;
    let mut xi = xi0.clone();
    let mut dist = (&xi - &target).norm();
    let mut log = vec![LogEntry {
        step: 0,
        distance_to_target: dist,
        distance_to_current_set: 0.0,
    }];
    let mut iterates = vec![xi.clone()];
    let mut order_used = Vec::new();
    let window = 10 * n;
    let mut history: std::collections::VecDeque<f64> =
        std::collections::VecDeque::with_capacity(window + 1);
    history.push_back(dist);
    let mut max_increase = 0.0f64;
    let mut step = 0usize;
    let mut last_step_len = 0.0;
    let reason = loop {
        if dist <= stop.tol {
            break StopReason::Converged { tol: stop.tol };
        }
        if step >= stop.max_iters {
            break StopReason::IterationCap;
        }
        let sym = order.entry(step + 1)?;
        let next = system.project(sym, &xi)?;
        last_step_len = (&xi - &next).norm();
        xi = next;
        step += 1;
        order_used.push(sym);
        let d = (&xi - &target).norm();
        max_increase = max_increase.max(d - dist);
        dist = d;
        if step.is_multiple_of(stride) {
            log.push(LogEntry {
                step,
                distance_to_target: dist,
                distance_to_current_set: last_step_len,
            });
            iterates.push(xi.clone());
        }
        history.push_back(dist);
        if history.len() > window {
            let old = history.pop_front().expect("nonempty");
            if old - dist < STAGNATION_REL * old && dist > stop.tol {
                break StopReason::Stagnated;
            }
        }
    };
    if log.last().map(|e| e.step) != Some(step) {
        log.push(LogEntry {
            step,
            distance_to_target: dist,
            distance_to_current_set: last_step_len,
        });
        iterates.push(xi.clone());
    }
    Ok(Trajectory {
        log,
        iterates,
        target,
        steps: step,
        stop: reason,
        final_distance: dist,
        max_increase,
        order_used,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub steps: usize,
    pub stop: StopReason,
    pub final_distance: f64,
    /// Geometric decay factor per projection from a log-linear fit of the
    /// logged tail; `None` when fewer than two positive distances are logged.
    pub rate_per_step: Option<f64>,
    /// `rate_per_step^N`.
    pub rate_per_sweep: Option<f64>,
    /// `‖ξ_n − P_∩ξ_0‖` never increased by more than `1e-12` in one step.
    pub monotone: bool,
}

pub fn convergence_report(traj: &Trajectory, system: &SubspaceSystem) -> ConvergenceReport {
    let tail: Vec<(f64, f64)> = {
        let pos: Vec<&LogEntry> = traj
            .log
            .iter()
            .filter(|e| e.distance_to_target > 0.0 && e.distance_to_target.is_finite())
            .collect();
        let start = pos.len() / 2;
        pos[start..]
            .iter()
            .map(|e| (e.step as f64, e.distance_to_target.ln()))
            .collect()
    };
    let rate_per_step = if tail.len() >= 2 {
        let n = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| (sxy / sxx).exp())
    } else {
        None
    };
    ConvergenceReport {
        steps: traj.steps,
        stop: traj.stop,
        final_distance: traj.final_distance,
        rate_per_step,
        rate_per_sweep: rate_per_step.map(|r| r.powi(system.len() as i32)),
        monotone: traj.max_increase <= 1e-12,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqspace::Alphabet;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn system(dim: usize, spans: Vec<Vec<Vec<f64>>>) -> SubspaceSystem {
        let spans: Vec<Vec<DVector<f64>>> = spans
            .into_iter()
            .map(|s| s.iter().map(|x| v(x)).collect())
            .collect();
        SubspaceSystem::from_spanning(dim, &spans, RANK_TOL).unwrap()
    }

    fn periodic(n: u32, p: Vec<Symbol>) -> SymbolicSequence {
        SymbolicSequence::periodic(Alphabet::new(n).unwrap(), p).unwrap()
    }

    #[test]
    fn orthonormalize_examples() {
        let q = orthonormalize(2, &[v(&[2.0, 0.0])], 1e-12).unwrap();
        assert_eq!(q, DMatrix::from_column_slice(2, 1, &[1.0, 0.0]));
        let q = orthonormalize(2, &[v(&[1.0, 0.0]), v(&[1.0, 1e-16])], 1e-12).unwrap();
        assert_eq!(q.ncols(), 1);
        let q = orthonormalize(3, &[], 1e-12).unwrap();
        assert_eq!(q.ncols(), 0);
        assert_eq!(
            project(&q, &v(&[1.0, 2.0, 3.0])).unwrap(),
            v(&[0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn project_examples() {
        let q = orthonormalize(2, &[v(&[1.0, 0.0])], 1e-12).unwrap();
        assert_eq!(project(&q, &v(&[3.0, 4.0])).unwrap(), v(&[3.0, 0.0]));
        let q = orthonormalize(2, &[v(&[1.0, 1.0])], 1e-12).unwrap();
        let p = project(&q, &v(&[1.0, 0.0])).unwrap();
        assert!((p - v(&[0.5, 0.5])).norm() < 1e-15);
        assert!(matches!(
            project(&q, &v(&[1.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn intersection_examples() {
        let s = system(
            3,
            vec![
                vec![vec![1., 0., 0.], vec![0., 1., 0.]],
                vec![vec![0., 1., 0.], vec![0., 0., 1.]],
            ],
        );
        let q = s.intersection_basis(INTERSECTION_TOL);
        assert_eq!(q.ncols(), 1);
        assert!((q[(1, 0)].abs() - 1.0).abs() < 1e-12);
        let s = system(2, vec![vec![vec![1., 0.]], vec![vec![1., 1.]]]);
        assert_eq!(s.intersection_basis(INTERSECTION_TOL).ncols(), 0);
        let s = system(2, vec![vec![vec![1., 0.]], vec![vec![3., 0.]]]);
        assert_eq!(s.intersection_basis(INTERSECTION_TOL).ncols(), 1);
    }

    #[test]
    fn orthogonal_axes_converge_in_two_steps() {
        let s = system(2, vec![vec![vec![1., 0.]], vec![vec![0., 1.]]]);
        let t = run_map(
            &s,
            &periodic(2, vec![1, 2]),
            &v(&[1., 1.]),
            StopRule::default(),
        )
        .unwrap();
        assert_eq!(t.steps, 2);
        assert_eq!(t.final_distance, 0.0);
        assert!(matches!(t.stop, StopReason::Converged { .. }));
        let r = convergence_report(&t, &s);
        assert!(r.monotone);
    }

    #[test]
    fn quarter_pi_decay() {
        let s = system(2, vec![vec![vec![1., 0.]], vec![vec![1., 1.]]]);
        let stop = StopRule {
            tol: 0.0,
            max_iters: 60,
            log_stride: 2,
        };
        let t = run_map(&s, &periodic(2, vec![2, 1]), &v(&[1., 0.]), stop).unwrap();
        for e in &t.log {
            let expected = 0.5f64.powi((e.step / 2) as i32);
            assert!((e.distance_to_target - expected).abs() <= 1e-10 * expected);
        }
        let r = convergence_report(&t, &s);
        assert!((r.rate_per_sweep.unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn missing_index_stagnates() {
        let s = system(2, vec![vec![vec![1., 0.]], vec![vec![1., 2.]]]);
        let t = run_map(
            &s,
            &periodic(2, vec![1]),
            &v(&[1., 1.]),
            StopRule::default(),
        )
        .unwrap();
        assert_eq!(t.stop, StopReason::Stagnated);
        assert!(t.final_distance > 0.5);
    }

    #[test]
    fn prefix_order_runs_out() {
        let s = system(2, vec![vec![vec![1., 0.]], vec![vec![1., 1.]]]);
        let order =
            SymbolicSequence::finite_prefix(Alphabet::new(2).unwrap(), vec![2, 1, 2]).unwrap();
        assert!(matches!(
            run_map(&s, &order, &v(&[1., 0.]), StopRule::default()),
            Err(Error::OutOfHorizon { .. })
        ));
    }

    #[test]
    fn system_json_round_trip() {
        let s: SubspaceSystem =
            serde_json::from_str(r#"{"dim":2,"subspaces":[[[2,0]],[[0,3],[0,1]]]}"#).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.basis(2).unwrap().ncols(), 1);
        let back: SubspaceSystem =
            serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn random_systems_are_seeded() {
        let a = SubspaceSystem::random(6, 3, 9).unwrap();
        let b = SubspaceSystem::random(6, 3, 9).unwrap();
        assert_eq!(a, b);
        for n in 1..=3 {
            let k = a.basis(n).unwrap().ncols();
            assert!((1..6).contains(&k));
        }
    }
}
