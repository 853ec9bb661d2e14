//! Leader-follower digraphs, grounded Laplacians and switching-signal accounting.
//!
//! Node 0 is the leader; followers are `1..=n`. Graph indices in a
//! [`TopologySet`] and a [`SwitchingSchedule`] are 1-based.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{Complex, DMatrix};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ctlinalg::{complex_rank_abs, eigenvalues, to_complex};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("adjacency matrix must be square with at least two nodes, got {0}x{1}")]
    Shape(usize, usize),
    #[error("adjacency entry a[{0}][{1}] = {2} must be finite and nonnegative")]
    Negative(usize, usize, f64),
    #[error("self loop a[{0}][{0}] = {1}")]
    SelfLoop(usize, f64),
    #[error("leader row must be zero, found a[0][{0}] = {1}")]
    LeaderParent(usize, f64),
    #[error("graph {k}: spectrum contradicts the grounded-Laplacian structure: {detail}")]
    SpectralViolation { k: usize, detail: String },
    #[error("graphs disagree on the follower count ({0} vs {1})")]
    NodeCount(usize, usize),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("segment {index}: {detail}")]
    Segment { index: usize, detail: String },
    #[error("time {t} precedes the reference instant {start}")]
    OutOfRange { t: f64, start: f64 },
    #[error("schedule eventually stays in disconnected topologies; no positive kappa exists")]
    NotSatisfiable,
    #[error("theta must be positive, got {0}")]
    Theta(f64),
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Weighted digraph on `n + 1` nodes; `a_ij > 0` means node `i` receives from node `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeaderFollowerTopology {
    adjacency: DMatrix<f64>,
}

impl LeaderFollowerTopology {
    pub fn new(adjacency: DMatrix<f64>) -> Result<Self> {
        let (r, c) = adjacency.shape();
        if r != c || r < 2 {
            return Err(GraphError::Shape(r, c));
        }
        for i in 0..r {
            for j in 0..r {
                let a = adjacency[(i, j)];
                if !(a.is_finite() && a >= 0.0) {
                    return Err(GraphError::Negative(i, j, a));
                }
            }
            if adjacency[(i, i)] != 0.0 {
                return Err(GraphError::SelfLoop(i, adjacency[(i, i)]));
            }
        }
        for j in 1..r {
            if adjacency[(0, j)] != 0.0 {
                return Err(GraphError::LeaderParent(j, adjacency[(0, j)]));
            }
        }
        Ok(Self { adjacency })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GraphError::Shape(n, rows.first().map_or(0, Vec::len)));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Number of followers.
    pub fn n(&self) -> usize {
        self.adjacency.nrows() - 1
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Pinning weights `(a_10, …, a_n0)`.
    pub fn leader_weights(&self) -> Vec<f64> {
        (1..=self.n()).map(|i| self.adjacency[(i, 0)]).collect()
    }
}

/// `l_ii = Σ_{j=0..n} a_ij`, `l_ij = −a_ij` over followers.
pub fn grounded_laplacian(topo: &LeaderFollowerTopology) -> DMatrix<f64> {
    let n = topo.n();
    let a = topo.adjacency();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (0..=n).map(|k| a[(i + 1, k)]).sum()
        } else {
            -a[(i + 1, j + 1)]
        }
    })
}

/// Whether the leader reaches every follower along edges `j → i` with `a_ij > 0`.
pub fn has_rooted_spanning_tree(topo: &LeaderFollowerTopology) -> bool {
    let a = topo.adjacency();
    let nodes = a.nrows();
    let mut seen = vec![false; nodes];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(j) = queue.pop_front() {
        for i in 0..nodes {
            if !seen[i] && a[(i, j)] > 0.0 {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen.iter().all(|&s| s)
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphSpectrum {
    /// 1-based graph index.
    pub k: usize,
    pub rooted: bool,
    pub min_real_part: f64,
    #[serde(skip)]
    pub eigenvalues: Vec<Complex<f64>>,
}

/// Classified graph set `{Ḡ_k}` with the `Γ_c / Γ_d` split and the scalars
/// `β_k`, `θ` used by the observer Riccati equation and its certificates.
#[derive(Clone, Debug)]
pub struct TopologySet {
    pub graphs: Vec<LeaderFollowerTopology>,
    pub laplacians: Vec<DMatrix<f64>>,
    pub gamma_c: Vec<usize>,
    pub gamma_d: Vec<usize>,
    /// `β_k` for `k ∈ Γ_c` (indexed like `gamma_c`).
    pub beta: Vec<f64>,
    pub theta: f64,
    /// `θ` computed from the spectra, before any override.
    pub theta_default: f64,
    pub spectra: Vec<GraphSpectrum>,
}

impl TopologySet {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Follower count shared by every graph.
    pub fn n(&self) -> usize {
        self.graphs[0].n()
    }

    pub fn is_connected(&self, k: usize) -> bool {
        self.gamma_c.contains(&k)
    }

    /// Grounded Laplacian of 1-based graph `k`.
    pub fn laplacian(&self, k: usize) -> &DMatrix<f64> {
        &self.laplacians[k - 1]
    }

    /// `β_k` for `k ∈ Γ_c`.
    pub fn beta_of(&self, k: usize) -> Option<f64> {
        self.gamma_c
            .iter()
            .position(|&c| c == k)
            .map(|pos| self.beta[pos])
    }

    /// Smallest `min Re λ(L_k)` over `Γ_c` (`None` when `Γ_c` is empty).
    pub fn min_connected_real_part(&self) -> Option<f64> {
        self.gamma_c
            .iter()
            .map(|&k| self.spectra[k - 1].min_real_part)
            .reduce(f64::min)
    }
}

/// Partitions graphs into `Γ_c` / `Γ_d` and verifies the grounded-Laplacian
/// spectral structure: every eigenvalue in the closed right-half plane with
/// semisimple imaginary-axis eigenvalues, and the open right-half plane for
/// rooted graphs.
///
/// Defaults: `β_k = 0.9 · min Re λ(L_k)` and
/// `θ = min(min_k β_k, 0.45 · min_k min Re λ(L_k))`, which also satisfies the
/// `θ < ½ min min Re λ` requirement of the decoupled designs. With no rooted
/// graph at all the default is `θ = 1`. `theta_override` replaces the default.
pub fn classify_topologies(
    graphs: Vec<LeaderFollowerTopology>,
    theta_override: Option<f64>,
) -> Result<TopologySet> {
    let first = graphs.first().ok_or(GraphError::Empty("graph list"))?;
    let n = first.n();
    if let Some(g) = graphs.iter().find(|g| g.n() != n) {
        return Err(GraphError::NodeCount(n, g.n()));
    }
    if let Some(theta) = theta_override {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(GraphError::Theta(theta));
        }
    }

    let laplacians: Vec<_> = graphs.iter().map(grounded_laplacian).collect();
    let mut gamma_c = Vec::new();
    let mut gamma_d = Vec::new();
    let mut beta = Vec::new();
    let mut spectra = Vec::new();
    for (idx, (g, l)) in graphs.iter().zip(&laplacians).enumerate() {
        let k = idx + 1;
        let rooted = has_rooted_spanning_tree(g);
        let ev = eigenvalues(l);
        let min_re = ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        check_spectrum(k, l, &ev, rooted)?;
        if rooted {
            gamma_c.push(k);
            beta.push(0.9 * min_re);
        } else {
            gamma_d.push(k);
        }
        spectra.push(GraphSpectrum {
            k,
            rooted,
            min_real_part: min_re,
            eigenvalues: ev,
        });
    }

    let theta_default = if gamma_c.is_empty() {
        1.0
    } else {
        let min_beta = beta.iter().copied().fold(f64::INFINITY, f64::min);
        let min_re = gamma_c
            .iter()
            .map(|&k| spectra[k - 1].min_real_part)
            .fold(f64::INFINITY, f64::min);
        min_beta.min(0.45 * min_re)
    };
    Ok(TopologySet {
        graphs,
        laplacians,
        gamma_c,
        gamma_d,
        beta,
        theta: theta_override.unwrap_or(theta_default),
        theta_default,
        spectra,
    })
}

fn check_spectrum(k: usize, l: &DMatrix<f64>, ev: &[Complex<f64>], rooted: bool) -> Result<()> {
    let scale = l.norm().max(1.0);
    let axis_tol = 1e-9 * scale;
    // eigenvalues of a defective block split by about sqrt(eps); cluster them first
    let cluster_radius = 1e-6 * scale;
    let violation = |detail: String| GraphError::SpectralViolation { k, detail };

    let mut clusters: Vec<Vec<Complex<f64>>> = Vec::new();
    for &z in ev {
        match clusters
            .iter_mut()
            .find(|c| (c[0] - z).norm() < cluster_radius)
        {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }

    for c in &clusters {
        let center = c.iter().sum::<Complex<f64>>() / c.len() as f64;
        if center.re < -axis_tol {
            return Err(violation(format!("eigenvalue {center} in the open left-half plane")));
        }
        if center.re.abs() < axis_tol {
            if rooted {
                return Err(violation(format!(
                    "rooted graph has eigenvalue {center} on the imaginary axis"
                )));
            }
            let center = Complex::new(0.0, center.im);
            let mut shifted = to_complex(l);
            for i in 0..l.nrows() {
                shifted[(i, i)] -= center;
            }
            let geometric = l.nrows() - complex_rank_abs(&shifted, 1e-8 * scale);
            if geometric != c.len() {
                return Err(violation(format!(
                    "imaginary-axis eigenvalue {center} is not semisimple (algebraic {}, geometric {geometric})",
                    c.len()
                )));
            }
        }
    }
    Ok(())
}

/// One constant-topology stretch of the switching signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    /// 1-based graph index.
    pub graph: usize,
    pub duration: f64,
}

/// Piecewise-constant, right-continuous switching signal `σ(t)`.
///
/// A periodic schedule repeats its segments forever; a non-periodic one holds
/// its last segment forever.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwitchingSchedule {
    pub segments: Vec<Segment>,
    pub periodic: bool,
    pub t0: f64,
}

impl SwitchingSchedule {
    pub fn new(segments: Vec<Segment>, periodic: bool, t0: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(GraphError::Empty("schedule"));
        }
        for (index, s) in segments.iter().enumerate() {
            if s.graph == 0 {
                return Err(GraphError::Segment {
                    index,
                    detail: "graph indices are 1-based".into(),
                });
            }
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(GraphError::Segment {
                    index,
                    detail: format!("duration {} must be positive", s.duration),
                });
            }
        }
        if !t0.is_finite() {
            return Err(GraphError::OutOfRange { t: t0, start: 0.0 });
        }
        Ok(Self {
            segments,
            periodic,
            t0,
        })
    }

    /// Schedule that stays on graph `k` forever.
    pub fn constant(k: usize, t0: f64) -> Self {
        Self {
            segments: vec![Segment {
                graph: k,
                duration: 1.0,
            }],
            periodic: true,
            t0,
        }
    }

    pub fn period(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Minimum segment duration `τ_d`.
    pub fn dwell_time(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.duration)
            .fold(f64::INFINITY, f64::min)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < self.t0 {
            return Err(GraphError::OutOfRange { t, start: self.t0 });
        }
        Ok(())
    }

    /// Position of `t` as (segment index, cycle count, start of that segment).
    fn locate(&self, t: f64) -> (usize, u64, f64) {
        let period = self.period();
        let mut rel = t - self.t0;
        let mut cycle = 0u64;
        if self.periodic {
            cycle = (rel / period).floor() as u64;
            rel -= cycle as f64 * period;
            // guard against rounding at exact multiples
            if rel >= period {
                cycle += 1;
                rel -= period;
            }
        }
        let mut start = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            if rel < start + s.duration {
                return (i, cycle, start);
            }
            start += s.duration;
        }
        let last = self.segments.len() - 1;
        (last, cycle, start - self.segments[last].duration)
    }

    /// `σ(t)`: the graph active on `[t_ℓ, t_{ℓ+1})` containing `t`.
    pub fn active_graph(&self, t: f64) -> Result<usize> {
        self.check_time(t)?;
        let (i, _, _) = self.locate(t);
        Ok(self.segments[i].graph)
    }

    /// Switch instants in `(t0, t_end]`, in increasing order.
    pub fn switch_times(&self, t_end: f64) -> Vec<f64> {
        let n = self.segments.len();
        let mut out = Vec::new();
        let mut t = self.t0;
        let mut i = 0usize;
        loop {
            let cur = self.segments[i % n];
            t += cur.duration;
            if t > t_end || (!self.periodic && i + 1 >= n) {
                break;
            }
            if self.segments[(i + 1) % n].graph != cur.graph {
                out.push(t);
            }
            i += 1;
        }
        out
    }

    /// Cumulative `(T^c, T^d)` over `[t0, t)`.
    fn cumulative(&self, connected: &dyn Fn(usize) -> bool, t: f64) -> (f64, f64) {
        let (mut tc, mut td) = (0.0, 0.0);
        let add = |k: usize, d: f64, tc: &mut f64, td: &mut f64| {
            if connected(k) {
                *tc += d;
            } else {
                *td += d;
            }
        };
        let (idx, cycle, seg_start) = self.locate(t);
        if cycle > 0 {
            let (mut pc, mut pd) = (0.0, 0.0);
            for s in &self.segments {
                add(s.graph, s.duration, &mut pc, &mut pd);
            }
            tc += cycle as f64 * pc;
            td += cycle as f64 * pd;
        }
        for s in &self.segments[..idx] {
            add(s.graph, s.duration, &mut tc, &mut td);
        }
        let rel = t - self.t0 - cycle as f64 * self.period();
        add(self.segments[idx].graph, rel - seg_start, &mut tc, &mut td);
        (tc, td)
    }

    /// Total activation times `(T^c, T^d)` over `[t̄0, t)`.
    pub fn activation_times(&self, set: &TopologySet, t_bar0: f64, t: f64) -> Result<(f64, f64)> {
        self.check_time(t_bar0)?;
        if t < t_bar0 || !t.is_finite() {
            return Err(GraphError::OutOfRange { t, start: t_bar0 });
        }
        let connected = |k: usize| set.is_connected(k);
        let (c1, d1) = self.cumulative(&connected, t);
        let (c0, d0) = self.cumulative(&connected, t_bar0);
        Ok(((c1 - c0).max(0.0), (d1 - d0).max(0.0)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kappa {
    Finite(f64),
    Unbounded,
}

impl Kappa {
    /// Whether this achieved ratio meets the requirement `κ ≥ required`.
    pub fn at_least(&self, required: f64) -> bool {
        match self {
            Kappa::Unbounded => true,
            Kappa::Finite(k) => *k >= required,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Kappa::Unbounded => f64::INFINITY,
            Kappa::Finite(k) => *k,
        }
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Unbounded => f.write_str("UNBOUNDED"),
            Kappa::Finite(k) => write!(f, "{k}"),
        }
    }
}

impl Serialize for Kappa {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Kappa::Unbounded => s.serialize_str("UNBOUNDED"),
            Kappa::Finite(k) => s.serialize_f64(*k),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SwitchReport {
    pub tau_d: f64,
    pub kappa_achieved: Kappa,
    pub t_bar0: f64,
    /// Positive dwell time.
    pub dwell_time_ok: bool,
    /// A positive `κ` exists.
    pub frequently_connected: bool,
}

/// Dwell time and the largest `κ` for which some `t̄0` gives
/// `T^c_{t̄0}(t) ≥ κ T^d_{t̄0}(t)` for all `t ≥ t̄0`.
///
/// Within a segment the ratio `T^c/T^d` is monotone, so its infimum is attained
/// at the end of a disconnected segment. For periodic schedules the value at
/// the same phase `k` periods later is `(a + k·C)/(b + k·D)`, monotone in `k`,
/// so the infimum over all time is the minimum of the first-period values and
/// the asymptotic ratio `C/D`. Candidate `t̄0` values are the segment starts of
/// the first period.
pub fn verify_switching_assumptions(
    schedule: &SwitchingSchedule,
    set: &TopologySet,
) -> Result<SwitchReport> {
    for (index, s) in schedule.segments.iter().enumerate() {
        if s.graph > set.len() {
            return Err(GraphError::Segment {
                index,
                detail: format!("graph {} not in the topology set of size {}", s.graph, set.len()),
            });
        }
    }
    let tau_d = schedule.dwell_time();
    let conn = |k: usize| set.is_connected(k);
    let segs = &schedule.segments;
    let period = schedule.period();

    let starts: Vec<f64> = segs
        .iter()
        .scan(schedule.t0, |t, s| {
            let start = *t;
            *t += s.duration;
            Some(start)
        })
        .collect();

    let (per_c, per_d) = segs.iter().fold((0.0, 0.0), |(c, d), s| {
        if conn(s.graph) {
            (c + s.duration, d)
        } else {
            (c, d + s.duration)
        }
    });

    let report = |kappa: Kappa, t_bar0: f64| SwitchReport {
        tau_d,
        kappa_achieved: kappa,
        t_bar0,
        dwell_time_ok: tau_d > 0.0,
        frequently_connected: kappa.at_least(f64::MIN_POSITIVE),
    };

    if !schedule.periodic {
        let last = segs.len() - 1;
        if !conn(segs[last].graph) {
            return Err(GraphError::NotSatisfiable);
        }
        // the trailing run of connected segments never sees T^d grow again
        let mut first = last;
        while first > 0 && conn(segs[first - 1].graph) {
            first -= 1;
        }
        return Ok(report(Kappa::Unbounded, starts[first]));
    }

    if per_c == 0.0 {
        return Err(GraphError::NotSatisfiable);
    }
    if per_d == 0.0 {
        return Ok(report(Kappa::Unbounded, schedule.t0));
    }

    let asymptotic = per_c / per_d;
    let mut best: Option<(f64, f64)> = None;
    for &t_bar0 in &starts {
        let mut inf = asymptotic;
        // ends of disconnected segments within one period after t̄0
        for cycle in 0..2 {
            for (i, s) in segs.iter().enumerate() {
                let end = starts[i] + s.duration + cycle as f64 * period;
                if conn(s.graph) || end <= t_bar0 || end > t_bar0 + period + 1e-12 * period {
                    continue;
                }
                let (tc, td) = schedule.activation_times(set, t_bar0, end)?;
                if td > 0.0 {
                    inf = inf.min(tc / td);
                }
            }
        }
        if best.is_none_or(|(k, _)| inf > k) {
            best = Some((inf, t_bar0));
        }
    }
    let (kappa, t_bar0) = best.expect("nonempty schedule");
    Ok(report(Kappa::Finite(kappa), t_bar0))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn example_graphs() -> Vec<LeaderFollowerTopology> {
        let rows = [
            [[0., 0., 0., 0.], [1., 0., 1., 0.], [0., 1., 0., 0.], [0., 0., 1., 0.]],
            [[0., 0., 0., 0.], [1., 0., 0., 0.], [0., 1., 0., 1.], [0., 0., 1., 0.]],
            [[0., 0., 0., 0.], [1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 1., 0.]],
            [[0.; 4]; 4],
        ];
        rows.iter()
            .map(|g| {
                LeaderFollowerTopology::from_rows(&g.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
                    .unwrap()
            })
            .collect()
    }

    pub(crate) fn example_schedule() -> SwitchingSchedule {
        let seg = |graph, duration| Segment { graph, duration };
        SwitchingSchedule::new(vec![seg(1, 6.0), seg(2, 6.0), seg(3, 6.0), seg(4, 2.0)], true, 0.0)
            .unwrap()
    }

    #[test]
    fn laplacian_of_first_graph() {
        let l = grounded_laplacian(&example_graphs()[0]);
        let expect = DMatrix::from_row_slice(3, 3, &[2., -1., 0., -1., 1., 0., 0., -1., 1.]);
        assert_eq!(l, expect);
    }

    #[test]
    fn trivial_laplacians() {
        let empty = LeaderFollowerTopology::new(DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(grounded_laplacian(&empty), DMatrix::zeros(3, 3));
        let single = LeaderFollowerTopology::from_rows(&[vec![0., 0.], vec![1., 0.]]).unwrap();
        assert_eq!(grounded_laplacian(&single), DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn invalid_adjacency_is_rejected() {
        let mut a = DMatrix::zeros(3, 3);
        a[(0, 0)] = 1.0;
        assert!(matches!(LeaderFollowerTopology::new(a), Err(GraphError::SelfLoop(0, _))));
        let mut a = DMatrix::zeros(3, 3);
        a[(0, 1)] = 1.0;
        assert!(matches!(LeaderFollowerTopology::new(a), Err(GraphError::LeaderParent(1, _))));
        let mut a = DMatrix::zeros(3, 3);
        a[(1, 2)] = -1.0;
        assert!(matches!(LeaderFollowerTopology::new(a), Err(GraphError::Negative(1, 2, _))));
    }

    #[test]
    fn spanning_tree_detection() {
        let g = example_graphs();
        assert!(has_rooted_spanning_tree(&g[0]));
        assert!(!has_rooted_spanning_tree(&g[3]));
        let mut a = DMatrix::zeros(3, 3);
        a[(2, 1)] = 1.0;
        assert!(!has_rooted_spanning_tree(&LeaderFollowerTopology::new(a).unwrap()));
    }

    #[test]
    fn example_graphs_classify() {
        let set = classify_topologies(example_graphs(), None).unwrap();
        assert_eq!(set.gamma_c, vec![1, 2, 3]);
        assert_eq!(set.gamma_d, vec![4]);
        let golden = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((set.spectra[0].min_real_part - golden).abs() < 1e-9);
        assert!((set.theta - 0.45 * golden).abs() < 1e-9);
        assert!((set.beta_of(1).unwrap() - 0.9 * golden).abs() < 1e-9);
        let set = classify_topologies(example_graphs(), Some(0.1)).unwrap();
        assert_eq!(set.theta, 0.1);
    }

    #[test]
    fn unrooted_chain_has_a_simple_zero_eigenvalue() {
        // follower 1 feeds follower 2, nobody hears the leader: L = [[0,0],[−1,1]]
        let mut a = DMatrix::zeros(3, 3);
        a[(2, 1)] = 1.0;
        let set = classify_topologies(vec![LeaderFollowerTopology::new(a).unwrap()], None).unwrap();
        assert_eq!(set.gamma_d, vec![1]);
        assert_eq!(set.theta, 1.0);
    }

    #[test]
    fn activation_time_examples() {
        let set = classify_topologies(example_graphs(), None).unwrap();
        let s = example_schedule();
        assert_eq!(s.activation_times(&set, 0.0, 20.0).unwrap(), (18.0, 2.0));
        assert_eq!(s.activation_times(&set, 7.0, 7.0).unwrap(), (0.0, 0.0));
        assert_eq!(s.activation_times(&set, 18.0, 20.0).unwrap(), (0.0, 2.0));
        assert_eq!(s.activation_times(&set, 0.0, 45.0).unwrap(), (41.0, 4.0));
        assert!(s.activation_times(&set, 5.0, 4.0).is_err());
    }

    #[test]
    fn active_graph_is_right_continuous() {
        let s = example_schedule();
        assert_eq!(s.active_graph(0.0).unwrap(), 1);
        assert_eq!(s.active_graph(6.0).unwrap(), 2);
        assert_eq!(s.active_graph(5.999).unwrap(), 1);
        assert_eq!(s.active_graph(19.9).unwrap(), 4);
        assert_eq!(s.active_graph(20.0).unwrap(), 1);
        assert!(s.active_graph(-1.0).is_err());
        assert_eq!(s.switch_times(40.0), vec![6.0, 12.0, 18.0, 20.0, 26.0, 32.0, 38.0, 40.0]);
    }

    #[test]
    fn example_schedule_kappa() {
        let set = classify_topologies(example_graphs(), None).unwrap();
        let rep = verify_switching_assumptions(&example_schedule(), &set).unwrap();
        assert_eq!(rep.tau_d, 2.0);
        assert_eq!(rep.kappa_achieved, Kappa::Finite(9.0));
        assert_eq!(rep.t_bar0, 0.0);
        assert!(rep.dwell_time_ok && rep.frequently_connected);
    }

    #[test]
    fn connected_only_is_unbounded_and_disconnected_only_fails() {
        let set = classify_topologies(example_graphs(), None).unwrap();
        let seg = |graph, duration| Segment { graph, duration };
        let s = SwitchingSchedule::new(vec![seg(1, 3.0), seg(2, 1.0)], true, 0.0).unwrap();
        assert_eq!(
            verify_switching_assumptions(&s, &set).unwrap().kappa_achieved,
            Kappa::Unbounded
        );
        let s = SwitchingSchedule::new(vec![seg(4, 1.0)], true, 0.0).unwrap();
        assert_eq!(verify_switching_assumptions(&s, &set).unwrap_err(), GraphError::NotSatisfiable);
        let s = SwitchingSchedule::new(vec![seg(1, 1.0), seg(4, 1.0)], false, 0.0).unwrap();
        assert_eq!(verify_switching_assumptions(&s, &set).unwrap_err(), GraphError::NotSatisfiable);
        let s = SwitchingSchedule::new(vec![seg(4, 1.0), seg(1, 1.0)], false, 0.0).unwrap();
        let rep = verify_switching_assumptions(&s, &set).unwrap();
        assert_eq!((rep.kappa_achieved, rep.t_bar0), (Kappa::Unbounded, 1.0));
    }

    #[test]
    fn kappa_with_offset_start_prefers_best_reference() {
        // 2 disconnected first, then 8 connected: from t̄0 = 2 the worst ratio is 8/2
        let set = classify_topologies(example_graphs(), None).unwrap();
        let seg = |graph, duration| Segment { graph, duration };
        let s = SwitchingSchedule::new(vec![seg(4, 2.0), seg(1, 8.0)], true, 0.0).unwrap();
        let rep = verify_switching_assumptions(&s, &set).unwrap();
        assert_eq!(rep.kappa_achieved, Kappa::Finite(4.0));
        assert_eq!(rep.t_bar0, 2.0);
    }
}
