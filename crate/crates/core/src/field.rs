//! Grid fields and two numerical realizations of the operator
//!
//! ```text
//!   T f(x, y) = ∫_ε^1 f(x − t, y − t^k) e^{2πiγ(t)} w_θ(t) dt,
//!   w_θ(t)    = t^{−θ} ψ(t)^{−(1−θ)},
//! ```
//!
//! applied to complex samples on a uniform rectangular grid.
//!
//! * [`apply_direct`] builds one shared Gauss–Kronrod node plan for the
//!   kernel on [ε, 1]: cells resolve at most half a cycle of γ and at most
//!   half the grid spacing, then refine until the kernel-only quadrature
//!   discrepancy, scaled by sup|f|, sits under the requested tolerance.
//!   Every output point reuses the same kernel-weighted nodes, so applying
//!   the operator is a weighted sum of bilinearly interpolated field values.
//! * [`apply_spectral`] transforms the field, multiplies each discrete mode
//!   by the truncated multiplier m_[ε,1](ξ_p, η_q) sampled at the grid's
//!   continuous frequencies, and transforms back.  It requires the
//!   periodic-extension flag; a multiplier sample that fails to converge
//!   aborts with the failing frequency.
//!
//! The truncation ε is an explicit parameter of both paths.  The ε → 0
//! limit is probed separately by [`epsilon_convergence`], which ladders ε
//! down dyadically and integrates each newly exposed kernel piece with a
//! method matched to its oscillation count: direct subdivision when the
//! piece holds few cycles, two rounds of integration by parts (with
//! finite-difference amplitude derivatives) when it holds many.

use std::collections::BinaryHeap;
use std::io::{self, Read, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{FieldError, QuadError};
use crate::exec::par_map;
use crate::oscquad::{
    gk15, integrate_oscillatory_complex, FrequencyPoint, OperatorSpec, OscEngine, WGK, XGK,
};
use crate::phase::PhasePair;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Magic bytes opening the binary field format.
const FIELD_MAGIC: [u8; 4] = *b"OSCF";

/// Hard cap on kernel-plan cells; reaching it means the requested
/// ε/tolerance combination is out of reach for the shared-node path.
const MAX_PLAN_CELLS: usize = 1 << 17;

/// Pieces holding more oscillation cycles than this are integrated by
/// two rounds of integration by parts instead of direct subdivision.
/// Direct subdivision costs about two cells per cycle, so the threshold
/// keeps it well inside the cell budget; above the threshold γ′·t is large
/// enough that the integration-by-parts remainder (which shrinks like
/// (γ′·t)^{−2} relative to the piece) is already far below the practical
/// tolerances, so the two methods' domains overlap with margin.
const IBP_CYCLE_THRESHOLD: f64 = 32768.0;

fn valid_dim(n: usize) -> bool {
    n >= 16 && n.is_power_of_two()
}

/// Kernel weight w_θ(t) = t^{−θ} ψ(t)^{−(1−θ)}.
fn theta_weight(pair: &PhasePair, spec: OperatorSpec, t: f64) -> f64 {
    if spec.theta == 0.0 {
        1.0 / pair.psi_val(t)
    } else {
        t.powf(-spec.theta) * pair.psi_val(t).powf(spec.theta - 1.0)
    }
}

// ---------------------------------------------------------------------------
// Grid fields
// ---------------------------------------------------------------------------

/// Complex samples on a uniform rectangular grid, stored row-major
/// (`index = iy * n_x + ix`); sample (ix, iy) sits at
/// `origin + (ix·h_x, iy·h_y)`.
///
/// Dimensions must be powers of two with both sides at least 16 (the
/// spectral path transforms both axes).  The `periodic` flag selects how
/// points outside the grid are read: wrapped around when set, zero when
/// not.
#[derive(Clone, Debug)]
pub struct GridField {
    pub n_x: usize,
    pub n_y: usize,
    pub h_x: f64,
    pub h_y: f64,
    pub origin: (f64, f64),
    pub periodic: bool,
    samples: Vec<Complex64>,
}

impl GridField {
    fn validate_geometry(n_x: usize, n_y: usize, h_x: f64, h_y: f64) -> Result<(), FieldError> {
        if !valid_dim(n_x) || !valid_dim(n_y) {
            return Err(FieldError::BadDimensions { n_x, n_y });
        }
        if !(h_x > 0.0 && h_x.is_finite() && h_y > 0.0 && h_y.is_finite()) {
            return Err(FieldError::BadSpacing { h_x, h_y });
        }
        Ok(())
    }

    /// Wrap existing samples (row-major, length n_x·n_y, all finite).
    pub fn new(
        n_x: usize,
        n_y: usize,
        h_x: f64,
        h_y: f64,
        origin: (f64, f64),
        periodic: bool,
        samples: Vec<Complex64>,
    ) -> Result<Self, FieldError> {
        Self::validate_geometry(n_x, n_y, h_x, h_y)?;
        if samples.len() != n_x * n_y {
            return Err(FieldError::Format {
                reason: format!(
                    "sample count {} does not match {} x {} grid",
                    samples.len(),
                    n_x,
                    n_y
                ),
            });
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FieldError::Format {
                reason: "sample values must be finite".to_string(),
            });
        }
        Ok(Self {
            n_x,
            n_y,
            h_x,
            h_y,
            origin,
            periodic,
            samples,
        })
    }

    /// All-zero field.
    pub fn zeros(
        n_x: usize,
        n_y: usize,
        h_x: f64,
        h_y: f64,
        origin: (f64, f64),
        periodic: bool,
    ) -> Result<Self, FieldError> {
        Self::new(
            n_x,
            n_y,
            h_x,
            h_y,
            origin,
            periodic,
            vec![Complex64::new(0.0, 0.0); n_x * n_y],
        )
    }

    /// Sample a closure at the grid points, row-major.
    pub fn from_fn<F>(
        n_x: usize,
        n_y: usize,
        h_x: f64,
        h_y: f64,
        origin: (f64, f64),
        periodic: bool,
        mut f: F,
    ) -> Result<Self, FieldError>
    where
        F: FnMut(f64, f64) -> Complex64,
    {
        Self::validate_geometry(n_x, n_y, h_x, h_y)?;
        let mut samples = Vec::with_capacity(n_x * n_y);
        for iy in 0..n_y {
            let y = origin.1 + iy as f64 * h_y;
            for ix in 0..n_x {
                let x = origin.0 + ix as f64 * h_x;
                samples.push(f(x, y));
            }
        }
        Self::new(n_x, n_y, h_x, h_y, origin, periodic, samples)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    /// Row-major index of (ix, iy).
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.n_x && iy < self.n_y);
        iy * self.n_x + ix
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.samples[self.idx(ix, iy)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, v: Complex64) {
        let i = self.idx(ix, iy);
        self.samples[i] = v;
    }

    /// Coordinates of grid point (ix, iy).
    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin.0 + ix as f64 * self.h_x,
            self.origin.1 + iy as f64 * self.h_y,
        )
    }

    /// Discrete L² norm: sqrt(h_x h_y Σ |f|²).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        (self.h_x * self.h_y * s).sqrt()
    }

    /// Largest sample magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Bilinear interpolation at an arbitrary point.  Outside the grid the
    /// field is read through periodic wrap-around when the flag is set and
    /// as zero otherwise.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Complex64 {
        let fx = (x - self.origin.0) / self.h_x;
        let fy = (y - self.origin.1) / self.h_y;
        let bx = fx.floor();
        let by = fy.floor();
        let ax = fx - bx;
        let ay = fy - by;
        let ix = bx as i64;
        let iy = by as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (dy, wy) in [(0i64, 1.0 - ay), (1i64, ay)] {
            if wy == 0.0 {
                continue;
            }
            for (dx, wx) in [(0i64, 1.0 - ax), (1i64, ax)] {
                let w = wx * wy;
                if w == 0.0 {
                    continue;
                }
                let (i, j) = (ix + dx, iy + dy);
                let v = if self.periodic {
                    let i = i.rem_euclid(self.n_x as i64) as usize;
                    let j = j.rem_euclid(self.n_y as i64) as usize;
                    self.samples[j * self.n_x + i]
                } else if i >= 0 && (i as usize) < self.n_x && j >= 0 && (j as usize) < self.n_y {
                    self.samples[(j as usize) * self.n_x + (i as usize)]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                acc += v * w;
            }
        }
        acc
    }

    // -- binary format ------------------------------------------------------

    /// Write the 32-byte header (magic, dims, spacings, periodic flag)
    /// followed by row-major little-endian (re, im) f64 pairs.  The origin
    /// is not persisted: stored fields are geometry-relative and read back
    /// with origin (0, 0).
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<(), FieldError> {
        let mut header = [0u8; 32];
        header[0..4].copy_from_slice(&FIELD_MAGIC);
        header[4..8].copy_from_slice(&(self.n_x as u32).to_le_bytes());
        header[8..12].copy_from_slice(&(self.n_y as u32).to_le_bytes());
        header[12..20].copy_from_slice(&self.h_x.to_le_bytes());
        header[20..28].copy_from_slice(&self.h_y.to_le_bytes());
        header[28] = u8::from(self.periodic);
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.samples.len() * 16);
        for z in &self.samples {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Read the binary format written by [`Self::write_binary`].
    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self, FieldError> {
        let mut header = [0u8; 32];
        r.read_exact(&mut header).map_err(truncated)?;
        if header[0..4] != FIELD_MAGIC {
            return Err(FieldError::Format {
                reason: "bad magic: not a binary field file".to_string(),
            });
        }
        let n_x = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let n_y = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let h_x = f64::from_le_bytes(header[12..20].try_into().unwrap());
        let h_y = f64::from_le_bytes(header[20..28].try_into().unwrap());
        let periodic = header[28] != 0;
        Self::validate_geometry(n_x, n_y, h_x, h_y)?;
        let mut buf = vec![0u8; n_x * n_y * 16];
        r.read_exact(&mut buf).map_err(truncated)?;
        let samples: Vec<Complex64> = buf
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..16].try_into().unwrap()),
                )
            })
            .collect();
        Self::new(n_x, n_y, h_x, h_y, (0.0, 0.0), periodic, samples)
    }

    pub fn write_binary_file<P: AsRef<std::path::Path>>(&self, path: P) -> Result<(), FieldError> {
        let mut w = io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_binary_file<P: AsRef<std::path::Path>>(path: P) -> Result<Self, FieldError> {
        let mut r = io::BufReader::new(std::fs::File::open(path)?);
        Self::read_binary(&mut r)
    }

    /// Plain-text export (`x,y,re,im` per sample, row-major); intended for
    /// inspecting small grids.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<(), FieldError> {
        writeln!(w, "x,y,re,im")?;
        for iy in 0..self.n_y {
            for ix in 0..self.n_x {
                let (x, y) = self.point(ix, iy);
                let z = self.samples[self.idx(ix, iy)];
                writeln!(w, "{x:.16e},{y:.16e},{:.16e},{:.16e}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

fn truncated(e: io::Error) -> FieldError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        FieldError::Format {
            reason: "truncated field data".to_string(),
        }
    } else {
        FieldError::Io(e)
    }
}

// ---------------------------------------------------------------------------
// Direct application: shared Gauss–Kronrod node plan
// ---------------------------------------------------------------------------

struct PlanNode {
    /// Quadrature abscissa in t.
    t: f64,
    /// Curve ordinate t^k.
    t_curve: f64,
    /// Kronrod coefficient times the kernel value: WGK·h·e^{2πiγ(t)}·w_θ(t).
    w: Complex64,
}

/// Fixed kernel quadrature shared by every output point.
struct KernelPlan {
    nodes: Vec<PlanNode>,
    /// Σ per-cell Gauss–Kronrod discrepancies of the bare kernel; the
    /// output error is estimated by this total times sup|f|.
    kernel_error: f64,
    n_cells: usize,
}

#[derive(Debug)]
struct PlanCell {
    err: f64,
    a: f64,
    b: f64,
}

impl PartialEq for PlanCell {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for PlanCell {}
impl PartialOrd for PlanCell {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for PlanCell {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

impl KernelPlan {
    fn build(
        pair: &PhasePair,
        spec: OperatorSpec,
        eps: f64,
        h_min: f64,
        sup_f: f64,
        tol: f64,
    ) -> Result<Self, FieldError> {
        let kernel =
            |t: f64| Complex64::from_polar(theta_weight(pair, spec, t), TWO_PI * pair.gamma_val(t));
        let gamma = |t: f64| pair.gamma_val(t);

        // Structural pass: each cell spans at most half a cycle of γ and at
        // most half the grid spacing, so per-point integrands are resolved.
        let max_width = 0.5 * h_min;
        let mut stack = vec![(eps, 1.0)];
        let mut heap: BinaryHeap<PlanCell> = BinaryHeap::new();
        let mut total_err = 0.0;
        while let Some((a, b)) = stack.pop() {
            let m = 0.5 * (a + b);
            let osc = (gamma(a) - gamma(m)).abs() + (gamma(m) - gamma(b)).abs();
            if (b - a > max_width || osc > 0.5) && heap.len() + stack.len() < MAX_PLAN_CELLS {
                stack.push((a, m));
                stack.push((m, b));
            } else {
                let (_, err) = gk15(&kernel, a, b);
                total_err += err;
                heap.push(PlanCell { err, a, b });
            }
        }
        // Error pass: split the worst kernel cells until the aggregate
        // discrepancy, scaled by sup|f|, sits under the tolerance.
        let scale = if sup_f > 0.0 { sup_f } else { 1.0 };
        while total_err * scale > tol && heap.len() < MAX_PLAN_CELLS {
            let worst = heap.pop().expect("plan heap cannot be empty");
            if worst.err * scale <= tol * 1e-6 / heap.len().max(1) as f64 {
                // Refinement has stalled on roundoff-floor cells.
                total_err += worst.err;
                heap.push(worst);
                break;
            }
            total_err -= worst.err;
            let m = 0.5 * (worst.a + worst.b);
            for (a, b) in [(worst.a, m), (m, worst.b)] {
                let (_, err) = gk15(&kernel, a, b);
                total_err += err;
                heap.push(PlanCell { err, a, b });
            }
        }
        if total_err * scale > tol {
            return Err(QuadError::ToleranceUnreachable {
                level: heap.len() as u64,
            }
            .into());
        }

        let ki = spec.k as i32;
        let n_cells = heap.len();
        let mut nodes = Vec::with_capacity(15 * n_cells);
        for cell in heap.into_iter() {
            let c = 0.5 * (cell.a + cell.b);
            let h = 0.5 * (cell.b - cell.a);
            let mut push = |t: f64, wgk: f64| {
                nodes.push(PlanNode {
                    t,
                    t_curve: t.powi(ki),
                    w: kernel(t) * (wgk * h),
                });
            };
            for (i, &x) in XGK.iter().enumerate().take(7) {
                push(c - h * x, WGK[i]);
                push(c + h * x, WGK[i]);
            }
            push(c, WGK[7]);
        }
        Ok(Self {
            nodes,
            kernel_error: total_err,
            n_cells,
        })
    }

    fn apply_at(&self, f: &GridField, x: f64, y: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in &self.nodes {
            acc += n.w * f.sample_bilinear(x - n.t, y - n.t_curve);
        }
        acc
    }
}

/// Report accompanying a direct application.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DirectReport {
    /// Aggregate kernel-quadrature discrepancy times sup|f|: the estimated
    /// absolute error of each output sample (interpolation error excluded).
    pub point_error_estimate: f64,
    /// Cells in the shared kernel plan.
    pub n_cells: usize,
}

/// Apply the truncated operator by per-point quadrature on a shared
/// kernel node plan.  Returns T f sampled on the input grid together with
/// the plan's error report.  Works for periodic and zero-padded fields
/// alike; cost grows with the cycle count of γ on [ε, 1].
pub fn apply_direct(
    f: &GridField,
    pair: &PhasePair,
    spec: OperatorSpec,
    eps: f64,
    tol: f64,
) -> Result<(GridField, DirectReport), FieldError> {
    if !(eps > 0.0 && eps < 1.0 && eps.is_finite()) {
        return Err(FieldError::BadEpsilon { eps });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::InvalidTolerance { tol }.into());
    }
    // Same pair/spec validation as every multiplier evaluation.
    OscEngine::multiplier(pair, spec)?;
    let sup_f = f.sup_norm();
    let plan = KernelPlan::build(pair, spec, eps, f.h_x.min(f.h_y), sup_f, tol)?;
    let rows: Vec<usize> = (0..f.n_y).collect();
    let out_rows: Vec<Vec<Complex64>> = par_map(&rows, |&iy| {
        let y = f.origin.1 + iy as f64 * f.h_y;
        (0..f.n_x)
            .map(|ix| {
                let x = f.origin.0 + ix as f64 * f.h_x;
                plan.apply_at(f, x, y)
            })
            .collect()
    });
    let mut samples = Vec::with_capacity(f.n_x * f.n_y);
    for row in out_rows {
        samples.extend(row);
    }
    let out = GridField::new(f.n_x, f.n_y, f.h_x, f.h_y, f.origin, f.periodic, samples)?;
    Ok((
        out,
        DirectReport {
            point_error_estimate: plan.kernel_error * sup_f,
            n_cells: plan.n_cells,
        },
    ))
}

// ---------------------------------------------------------------------------
// Spectral application: DFT, multiplier table, inverse DFT
// ---------------------------------------------------------------------------

/// Continuous frequency of DFT bin `p` on an axis with `n` points spaced
/// `h`: p/(n·h) for p ≤ n/2 and (p − n)/(n·h) above.
pub fn grid_frequency(p: usize, n: usize, h: f64) -> f64 {
    let s = if p <= n / 2 {
        p as f64
    } else {
        p as f64 - n as f64
    };
    s / (n as f64 * h)
}

/// Unnormalized forward (e^{−2πi}) or inverse (e^{+2πi}) DFT along both
/// axes of a row-major n_x × n_y buffer.
fn fft2(data: &mut [Complex64], n_x: usize, n_y: usize, forward: bool) {
    let mut planner = FftPlanner::new();
    let row_fft = if forward {
        planner.plan_fft_forward(n_x)
    } else {
        planner.plan_fft_inverse(n_x)
    };
    for row in data.chunks_exact_mut(n_x) {
        row_fft.process(row);
    }
    let col_fft = if forward {
        planner.plan_fft_forward(n_y)
    } else {
        planner.plan_fft_inverse(n_y)
    };
    let mut col = vec![Complex64::new(0.0, 0.0); n_y];
    for p in 0..n_x {
        for q in 0..n_y {
            col[q] = data[q * n_x + p];
        }
        col_fft.process(&mut col);
        for q in 0..n_y {
            data[q * n_x + p] = col[q];
        }
    }
}

/// Sample a multiplier at every grid frequency (ξ_p, η_q), row-major in
/// (q, p).  The sampler runs in parallel over bins; the first failure
/// aborts with its frequency.
pub(crate) fn multiplier_table<F>(
    n_x: usize,
    n_y: usize,
    h_x: f64,
    h_y: f64,
    m: F,
) -> Result<Vec<Complex64>, FieldError>
where
    F: Fn(f64, f64) -> Result<Complex64, QuadError> + Sync,
{
    let bins: Vec<usize> = (0..n_x * n_y).collect();
    let raw = par_map(&bins, |&i| {
        let xi = grid_frequency(i % n_x, n_x, h_x);
        let eta = grid_frequency(i / n_x, n_y, h_y);
        (xi, eta, m(xi, eta))
    });
    let mut table = Vec::with_capacity(raw.len());
    for (xi, eta, r) in raw {
        match r {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => table.push(v),
            _ => return Err(FieldError::MultiplierFailure { xi, eta }),
        }
    }
    Ok(table)
}

/// Multiply the field's DFT bin-by-bin with a precomputed multiplier table
/// (layout as produced by [`multiplier_table`]) and transform back.
pub(crate) fn spectral_apply_table(
    f: &GridField,
    table: &[Complex64],
) -> Result<GridField, FieldError> {
    if !f.periodic {
        return Err(FieldError::NotPeriodic);
    }
    if table.len() != f.n_x * f.n_y {
        return Err(FieldError::DimensionMismatch {
            got_x: table.len(),
            got_y: 1,
            want_x: f.n_x * f.n_y,
            want_y: 1,
        });
    }
    let mut data = f.samples.clone();
    fft2(&mut data, f.n_x, f.n_y, true);
    for (z, m) in data.iter_mut().zip(table) {
        *z *= m;
    }
    fft2(&mut data, f.n_x, f.n_y, false);
    let norm = 1.0 / (f.n_x * f.n_y) as f64;
    for z in &mut data {
        *z *= norm;
    }
    GridField::new(f.n_x, f.n_y, f.h_x, f.h_y, f.origin, f.periodic, data)
}

/// The truncated operator's multiplier m_[ε,1] sampled on the discrete
/// frequency lattice of one periodic grid shape.
///
/// Building the table is the expensive half of a spectral application (one
/// quadrature per Fourier bin); applying it is two FFTs and a pointwise
/// product.  Build once per grid shape and reuse across any number of
/// fields on that shape.
#[derive(Clone, Debug)]
pub struct MultiplierTable {
    n_x: usize,
    n_y: usize,
    h_x: f64,
    h_y: f64,
    bins: Vec<Complex64>,
    sup_abs: f64,
}

impl MultiplierTable {
    /// Evaluate m_[eps,1](ξ_p, η_q) = ∫_ε^1 e^{2πi(γ − ξ_p t − η_q t^k)} w_θ dt
    /// over every Fourier bin of an `n_x` × `n_y` grid with spacings
    /// (`h_x`, `h_y`).  A bin whose quadrature fails to converge aborts the
    /// build with its frequency.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        pair: &PhasePair,
        spec: OperatorSpec,
        eps: f64,
        tol: f64,
        n_x: usize,
        n_y: usize,
        h_x: f64,
        h_y: f64,
    ) -> Result<Self, FieldError> {
        if !(valid_dim(n_x) && valid_dim(n_y)) {
            return Err(FieldError::BadDimensions { n_x, n_y });
        }
        if !(h_x > 0.0 && h_x.is_finite() && h_y > 0.0 && h_y.is_finite()) {
            return Err(FieldError::BadSpacing { h_x, h_y });
        }
        if !(eps > 0.0 && eps < 1.0 && eps.is_finite()) {
            return Err(FieldError::BadEpsilon { eps });
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(QuadError::InvalidTolerance { tol }.into());
        }
        OscEngine::multiplier(pair, spec)?;
        let bins = multiplier_table(n_x, n_y, h_x, h_y, |xi, eta| {
            let r = OscEngine::multiplier(pair, spec)?.eval_interval(
                FrequencyPoint::new(xi, eta),
                eps,
                1.0,
                tol,
            )?;
            if r.converged {
                Ok(r.value)
            } else {
                Err(QuadError::ToleranceUnreachable { level: 0 })
            }
        })?;
        let sup_abs = bins.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(Self {
            n_x,
            n_y,
            h_x,
            h_y,
            bins,
            sup_abs,
        })
    }

    /// Grid shape the table was built for.
    pub fn dims(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    /// Grid spacing the table was built for.
    pub fn spacing(&self) -> (f64, f64) {
        (self.h_x, self.h_y)
    }

    /// Largest |m| over the sampled bins — the spectral operator norm on
    /// this grid shape.
    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    /// The sampled bins, row-major in (q, p) like the field layout; bin
    /// (p, q) holds m at ([`grid_frequency`]`(p, n_x, h_x)`,
    /// [`grid_frequency`]`(q, n_y, h_y)`).
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    /// Apply the sampled operator to one field.  The field must be
    /// periodic and live on exactly the grid shape the table was built
    /// for (the bin frequencies depend on both the dimensions and the
    /// spacing).
    pub fn apply(&self, f: &GridField) -> Result<GridField, FieldError> {
        if f.n_x != self.n_x || f.n_y != self.n_y {
            return Err(FieldError::DimensionMismatch {
                got_x: f.n_x,
                got_y: f.n_y,
                want_x: self.n_x,
                want_y: self.n_y,
            });
        }
        if f.h_x != self.h_x || f.h_y != self.h_y {
            return Err(FieldError::SpacingMismatch {
                got_x: f.h_x,
                got_y: f.h_y,
                want_x: self.h_x,
                want_y: self.h_y,
            });
        }
        spectral_apply_table(f, &self.bins)
    }
}

/// Apply the truncated operator through the discrete Fourier transform:
/// multiply mode (p, q) by m_[ε,1](ξ_p, η_q) = ∫_ε^1 e^{2πi(γ − ξ_p t − η_q t^k)} w_θ dt.
/// Requires the periodic-extension flag.  Builds a [`MultiplierTable`] for
/// the field's shape and discards it; reuse the table directly when
/// applying to several fields.
pub fn apply_spectral(
    f: &GridField,
    pair: &PhasePair,
    spec: OperatorSpec,
    eps: f64,
    tol: f64,
) -> Result<GridField, FieldError> {
    if !f.periodic {
        return Err(FieldError::NotPeriodic);
    }
    MultiplierTable::build(pair, spec, eps, tol, f.n_x, f.n_y, f.h_x, f.h_y)?.apply(f)
}

// ---------------------------------------------------------------------------
// Truncation ladder: I(ε) on a dyadic ε grid
// ---------------------------------------------------------------------------

/// One row of the truncation ladder.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EpsilonStep {
    pub eps: f64,
    /// I(ε) = ∫_ε^1 f(x − t, y − t^k) e^{2πiγ} w_θ dt.
    pub value: Complex64,
    /// |I(ε_m) − I(ε_{m−1})| = |newly exposed piece|; NaN on the first row.
    pub increment_abs: f64,
    /// Accumulated quadrature error bound for `value`.
    pub quad_error: f64,
}

/// Dyadic truncation ladder for the operator integral at one point.
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonLadder {
    pub point: (f64, f64),
    pub steps: Vec<EpsilonStep>,
    /// Least-squares slope of log2(increment) against the step index;
    /// negative when the truncation converges geometrically.
    pub fit_slope_log2: f64,
    pub fit_intercept_log2: f64,
    /// Whether the increments decrease monotonically down the ladder.
    pub monotone_decreasing: bool,
}

/// Probe the ε → 0 limit of T f(x, y) for an analytic field closure: ladder
/// ε down dyadically from `eps0` and integrate each newly exposed kernel
/// piece.  Pieces holding at most [`IBP_CYCLE_THRESHOLD`] cycles of γ are
/// integrated by oscillation-aware subdivision; deeper pieces (where γ′ is
/// enormous) by two rounds of integration by parts with finite-difference
/// amplitude derivatives, whose residual ∫|ψ′| is an explicit bound.
pub fn epsilon_convergence<F>(
    f: F,
    point: (f64, f64),
    pair: &PhasePair,
    spec: OperatorSpec,
    eps0: f64,
    n_steps: usize,
    tol: f64,
) -> Result<EpsilonLadder, FieldError>
where
    F: Fn(f64, f64) -> Complex64,
{
    if !(eps0 > 0.0 && eps0 < 1.0 && eps0.is_finite()) {
        return Err(FieldError::BadEpsilon { eps: eps0 });
    }
    if !(2..=48).contains(&n_steps) {
        return Err(QuadError::InvalidSpec {
            reason: "truncation ladder needs 2..=48 dyadic steps",
        }
        .into());
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::InvalidTolerance { tol }.into());
    }
    OscEngine::multiplier(pair, spec)?;
    let (x, y) = point;
    let ki = spec.k as i32;
    let amp = |t: f64| f(x - t, y - t.powi(ki)) * theta_weight(pair, spec, t);
    let piece_tol = tol / (n_steps as f64 + 1.0);

    let mut steps = Vec::with_capacity(n_steps + 1);
    let (top, top_err) = piece_integral(pair, &amp, eps0, 1.0, piece_tol)?;
    steps.push(EpsilonStep {
        eps: eps0,
        value: top,
        increment_abs: f64::NAN,
        quad_error: top_err,
    });
    let mut acc = top;
    let mut acc_err = top_err;
    for m in 0..n_steps {
        let hi = eps0 * 0.5f64.powi(m as i32);
        let lo = 0.5 * hi;
        let (piece, err) = piece_integral(pair, &amp, lo, hi, piece_tol)?;
        acc += piece;
        acc_err += err;
        steps.push(EpsilonStep {
            eps: lo,
            value: acc,
            increment_abs: piece.norm(),
            quad_error: acc_err,
        });
    }

    let mut n = 0.0;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (m, s) in steps.iter().enumerate().skip(1) {
        if s.increment_abs > 0.0 && s.increment_abs.is_finite() {
            let xv = m as f64;
            let yv = s.increment_abs.log2();
            n += 1.0;
            sx += xv;
            sy += yv;
            sxx += xv * xv;
            sxy += xv * yv;
        }
    }
    let denom = n * sxx - sx * sx;
    let slope = if denom > 0.0 {
        (n * sxy - sx * sy) / denom
    } else {
        f64::NAN
    };
    let intercept = if n > 0.0 { (sy - slope * sx) / n } else { f64::NAN };
    let monotone = steps
        .windows(2)
        .skip(1)
        .all(|w| w[1].increment_abs <= w[0].increment_abs * (1.0 + 1e-12));

    Ok(EpsilonLadder {
        point,
        steps,
        fit_slope_log2: slope,
        fit_intercept_log2: intercept,
        monotone_decreasing: monotone,
    })
}

/// CSV rows of a truncation ladder: eps, Re I(ε), Im I(ε), increment, error.
pub fn write_ladder_csv<W: Write>(ladder: &EpsilonLadder, w: &mut W) -> Result<(), FieldError> {
    writeln!(w, "eps,re,im,increment_abs,quad_error")?;
    for s in &ladder.steps {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.eps, s.value.re, s.value.im, s.increment_abs, s.quad_error
        )?;
    }
    Ok(())
}

/// ∫_a^b amp(t) e^{2πiγ(t)} dt with method selection by cycle count.
fn piece_integral<A>(
    pair: &PhasePair,
    amp: &A,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(Complex64, f64), FieldError>
where
    A: Fn(f64) -> Complex64,
{
    let m = 0.5 * (a + b);
    let cycles =
        (pair.gamma_val(a) - pair.gamma_val(m)).abs() + (pair.gamma_val(m) - pair.gamma_val(b)).abs();
    if cycles <= IBP_CYCLE_THRESHOLD {
        let q = integrate_oscillatory_complex(|t| pair.gamma_val(t), amp, a, b, tol)?;
        if !q.converged {
            return Err(QuadError::ToleranceUnreachable { level: 0 }.into());
        }
        Ok((q.value, q.abs_error_estimate))
    } else {
        let (value, bound) = ibp2_piece(pair, amp, a, b);
        if bound.is_nan() || bound > tol {
            return Err(QuadError::ToleranceUnreachable { level: 0 }.into());
        }
        Ok((value, bound))
    }
}

/// Two rounds of integration by parts against e^{2πiγ}:
///
/// ```text
///   ∫ amp·e^{2πiγ} = [φ e^{2πiγ}] − [ψ e^{2πiγ}] + ∫ ψ′ e^{2πiγ},
///   φ = amp/(2πiγ′),   ψ = φ′/(2πiγ′),   |remainder| ≤ ∫ |ψ′|.
/// ```
///
/// φ′ and ψ′ use centered finite differences (the field closure is assumed
/// smooth); the remainder bound is integrated by a fixed Gauss–Kronrod
/// sweep, and a finite-difference noise allowance is added to the bound.
/// Accurate precisely where direct subdivision is unaffordable: many
/// cycles mean large γ′ and tiny φ, ψ.
fn ibp2_piece<A>(pair: &PhasePair, amp: &A, a: f64, b: f64) -> (Complex64, f64)
where
    A: Fn(f64) -> Complex64,
{
    let i2pi = Complex64::new(0.0, TWO_PI);
    let phi = |t: f64| amp(t) / (i2pi * pair.gamma1_val(t));
    let dphi = |t: f64| {
        let d = t * 1e-5;
        (phi(t + d) - phi(t - d)) / (2.0 * d)
    };
    let psi = |t: f64| dphi(t) / (i2pi * pair.gamma1_val(t));
    let dpsi = |t: f64| {
        let d = t * 1e-4;
        (psi(t + d) - psi(t - d)) / (2.0 * d)
    };
    let boundary = |t: f64| {
        (phi(t) - psi(t)) * Complex64::from_polar(1.0, TWO_PI * pair.gamma_val(t))
    };
    let value = boundary(b) - boundary(a);

    let abs_dpsi = |t: f64| Complex64::new(dpsi(t).norm(), 0.0);
    let mut remainder = 0.0;
    let n = 8;
    let step = (b - a) / n as f64;
    for i in 0..n {
        let (v, e) = gk15(&abs_dpsi, a + i as f64 * step, a + (i + 1) as f64 * step);
        remainder += v.re.abs() + e;
    }
    let fd_noise = 1e-9 * (phi(a).norm() + phi(b).norm())
        + 1e-6 * (psi(a).norm() + psi(b).norm());
    (value, remainder + fd_noise)
}
