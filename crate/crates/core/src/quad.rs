//! Adaptive Gauss–Kronrod quadrature on finite intervals.
//!
//! The 21-point Kronrod rule is paired with its embedded 10-point Gauss rule
//! for the error estimate. Integrable endpoint singularities of the form
//! `(x - a)^s` are handled by the substitution `x = a + h u^m`, with `m`
//! picked so the transformed integrand is C¹ at the endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_529_978_460,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature failed to converge: estimate {value:e}, error estimate {error:e}")]
    NoConvergence { value: f64, error: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 4000 }
    }
}

impl QuadOptions {
    /// Tolerances for integrals whose value may be tiny (tail envelopes near
    /// the right endpoint), where only a relative criterion is meaningful.
    pub fn relative(rel_tol: f64) -> Self {
        QuadOptions { abs_tol: 1e-300, rel_tol, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Behaviour of the integrand at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Regular,
    /// Integrand behaves like `|x - endpoint|^s` (possibly times logarithms).
    Power(f64),
}

impl Endpoint {
    /// Substitution exponent `m` making `|x-e|^s` C¹ after `x = e + h u^m`.
    pub fn substitution_power(self) -> i32 {
        match self {
            Endpoint::Regular => 1,
            Endpoint::Power(s) => {
                // (s + 1) m - 1 >= 1, plus one extra for logarithmic factors.
                let m = (2.0 / (s + 1.0)).ceil() as i32 + 1;
                m.clamp(2, 12)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut scaled = err.abs();
    if resasc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / resasc).powf(1.5);
        scaled = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * resabs);
    }
    scaled
}

/// Single 21-point Gauss–Kronrod panel on `[a, b]`.
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    let fc = eval(f, center)?;
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let error = rescale_error((resk - resg) * half, resabs * half.abs(), resasc * half.abs());
    Ok(Segment { a, b, value, error })
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64, QuadError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(QuadError::NonFinite { x })
    }
}

/// Globally adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral, QuadError> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let first = gk21(&mut f, a, b)?;
    let mut evaluations = 21;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(QuadError::NoConvergence { value: total, error: total_err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Interval can no longer be split in floating point.
            return Err(QuadError::NoConvergence { value: total, error: total_err });
        }
        let left = gk21(&mut f, worst.a, mid)?;
        let right = gk21(&mut f, mid, worst.b)?;
        evaluations += 42;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally to keep the running totals free of drift.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Integral { value, error, evaluations })
}

/// Integrates `f` over `[a, b]` with substitutions at singular endpoints.
pub fn integrate_singular<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    left: Endpoint,
    right: Endpoint,
    opts: QuadOptions,
) -> Result<Integral, QuadError> {
    integrate_singular_gap(|x, _| f(x), a, b, left, right, opts)
}

/// As [`integrate_singular`], but `f(x, b − x)` also receives the distance
/// to the right endpoint, computed without cancellation on the mapped
/// part. Integrands singular at `b` should use it instead of forming `b − x`.
pub fn integrate_singular_gap<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    left: Endpoint,
    right: Endpoint,
    opts: QuadOptions,
) -> Result<Integral, QuadError> {
    let ml = left.substitution_power();
    let mr = right.substitution_power();
    match (ml > 1, mr > 1) {
        (false, false) => integrate(|x| f(x, b - x), a, b, opts),
        (true, false) => integrate_left_mapped(&mut f, a, b, b, ml, opts),
        (false, true) => integrate_right_mapped(&mut f, a, b, mr, opts),
        (true, true) => {
            let mid = 0.5 * (a + b);
            let l = integrate_left_mapped(&mut f, a, mid, b, ml, opts)?;
            let r = integrate_right_mapped(&mut f, mid, b, mr, opts)?;
            Ok(Integral {
                value: l.value + r.value,
                error: l.error + r.error,
                evaluations: l.evaluations + r.evaluations,
            })
        }
    }
}

fn integrate_left_mapped<F: FnMut(f64, f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    end: f64,
    m: i32,
    opts: QuadOptions,
) -> Result<Integral, QuadError> {
    let h = b - a;
    let mf = m as f64;
    integrate(
        |u: f64| {
            let um1 = u.powi(m - 1);
            let x = a + h * um1 * u;
            if um1 == 0.0 {
                return 0.0;
            }
            f(x, end - x) * h * mf * um1
        },
        0.0,
        1.0,
        opts,
    )
}

fn integrate_right_mapped<F: FnMut(f64, f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    m: i32,
    opts: QuadOptions,
) -> Result<Integral, QuadError> {
    let h = b - a;
    let mf = m as f64;
    integrate(
        |u: f64| {
            let um1 = u.powi(m - 1);
            let gap = h * um1 * u;
            if um1 == 0.0 || gap == 0.0 {
                return 0.0;
            }
            // Near u = 1 the left end is the accurate reference.
            let x = if gap > 0.5 * h { a + h * (1.0 - um1 * u) } else { b - gap };
            f(x, gap) * h * mf * um1
        },
        0.0,
        1.0,
        opts,
    )
}

/// A fixed composite Gauss–Kronrod rule on `[0, 1]`, geometrically graded
/// toward both endpoints. Used when many integrands share the same nodes.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    nodes: Vec<f64>,
    kronrod: Vec<f64>,
    gauss: Vec<f64>,
}

impl CompositeRule {
    /// Panels: `left` decades toward 0 and `right` decades toward 1, each
    /// split into `per_decade` geometric pieces, and `middle` uniform panels
    /// on `[0.1, 0.9]`.
    pub fn graded(left: u32, right: u32, per_decade: u32, middle: u32) -> Self {
        let mut breaks = Vec::new();
        let pd = per_decade as f64;
        for i in 0..=left * per_decade {
            let e = -((left + 1) as f64) + i as f64 / pd;
            breaks.push(10f64.powf(e));
        }
        for i in 1..middle {
            breaks.push(0.1 + 0.8 * i as f64 / middle as f64);
        }
        for i in (0..=right * per_decade).rev() {
            let e = -((right + 1) as f64) + i as f64 / pd;
            breaks.push(1.0 - 10f64.powf(e));
        }

        let mut rule = CompositeRule {
            nodes: Vec::with_capacity(21 * breaks.len()),
            kronrod: Vec::with_capacity(21 * breaks.len()),
            gauss: Vec::with_capacity(21 * breaks.len()),
        };
        for w in breaks.windows(2) {
            rule.push_panel(w[0], w[1]);
        }
        rule
    }

    fn push_panel(&mut self, a: f64, b: f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for j in 0..10 {
            let g = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
            self.nodes.push(c - h * XGK[j]);
            self.kronrod.push(WGK[j] * h);
            self.gauss.push(g);
            self.nodes.push(c + h * XGK[j]);
            self.kronrod.push(WGK[j] * h);
            self.gauss.push(g);
        }
        self.nodes.push(c);
        self.kronrod.push(WGK[10] * h);
        self.gauss.push(0.0);
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates tabulated values (aligned with `nodes()`); returns the
    /// Kronrod sum and the summed per-panel |Kronrod − Gauss| differences.
    pub fn apply(&self, values: &[f64]) -> (f64, f64) {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut total = 0.0;
        let mut err = 0.0;
        for (chunk, (wk, wg)) in values.chunks(21).zip(self.kronrod.chunks(21).zip(self.gauss.chunks(21))) {
            let k: f64 = chunk.iter().zip(wk).map(|(v, w)| v * w).sum();
            let g: f64 = chunk.iter().zip(wg).map(|(v, w)| v * w).sum();
            total += k;
            err += (k - g).abs();
        }
        (total, err)
    }
}
