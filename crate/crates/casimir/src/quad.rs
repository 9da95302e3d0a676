//! Adaptive quadrature on finite intervals built on the 10-21 Gauss-Kronrod
//! pair (QUADPACK dqk21 constants).
//!
//! Panels are bisected depth-first, left to right, and accumulated with
//! compensated summation, so the result is deterministic for a given
//! integrand and tolerance. The error estimate per panel uses the QUADPACK
//! rescaling of the Gauss/Kronrod difference. A panel is also accepted once
//! its error estimate reaches the roundoff floor relative to the panel's
//! integral of |f| (or the caller-declared noise level of the integrand);
//! bisection cannot improve on either, only inflate the panel count.

use crate::kahan::KahanSum;

#[allow(clippy::excessive_precision)]
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
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const MAX_DEPTH: usize = 48;

/// Roundoff floor: a panel estimate below this times panel resabs is noise.
const ROUNDOFF_REL: f64 = 100.0 * f64::EPSILON;

/// Tolerances controlling one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Target relative tolerance on the whole integral.
    pub rel_tol: f64,
    /// Absolute floor on the whole-integral tolerance.
    pub abs_floor: f64,
    /// Known relative noise of the integrand itself (nested quadratures);
    /// panels whose error estimate is at this level are accepted as-is.
    pub noise_rel: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_floor: 0.0,
            noise_rel: 0.0,
        }
    }
}

impl QuadOptions {
    pub fn new(rel_tol: f64, abs_floor: f64) -> Self {
        Self {
            rel_tol,
            abs_floor,
            noise_rel: 0.0,
        }
    }

    pub fn with_noise(mut self, noise_rel: f64) -> Self {
        self.noise_rel = noise_rel;
        self
    }
}

/// Integral value with its error estimate and the evaluation count.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 10-21 Gauss-Kronrod panel; returns (integral, error estimate, resabs).
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0f64; 10];
    let mut fv2 = [0.0f64; 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let absc = half * XGK[jtw];
        let f1 = f(center - absc);
        let f2 = f(center + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += WG[j] * (f1 + f2);
        resk += WGK[jtw] * (f1 + f2);
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let absc = half * XGK[jtwm1];
        let f1 = f(center - absc);
        let f2 = f(center + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += WGK[jtwm1] * (f1 + f2);
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let err = (resk - resg) * half;
    (
        resk * half,
        rescale_error(err, resabs * abs_half, resasc * abs_half),
        resabs * abs_half,
    )
}

struct Accum {
    value: KahanSum,
    err: KahanSum,
    evals: usize,
}

struct Budget {
    tol_per_width: f64,
    floor_rel: f64,
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: usize, budget: &Budget, acc: &mut Accum) {
    let (v, e, resabs) = gk21(f, a, b);
    acc.evals += 21;
    let width = b - a;
    let converged = e <= budget.tol_per_width * width
        || e <= budget.floor_rel * resabs
        || depth >= MAX_DEPTH
        || width < 1e-280;
    if converged {
        acc.value.add(v);
        acc.err.add(e);
        return;
    }
    let mid = 0.5 * (a + b);
    refine(f, a, mid, depth + 1, budget, acc);
    refine(f, mid, b, depth + 1, budget, acc);
}

/// Adaptively integrate `f` over `[a, b]`.
///
/// The target absolute tolerance is `max(abs_floor, rel_tol * |I0|)` where
/// `I0` is a first whole-interval estimate; each accepted panel gets a share
/// proportional to its width, and panels at the roundoff/noise floor are
/// accepted outright.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evals: 0,
        };
    }
    let (i0, _, _) = gk21(f, a, b);
    let tol_abs = opts.abs_floor.max(opts.rel_tol * i0.abs());
    let budget = Budget {
        tol_per_width: tol_abs / (b - a).abs(),
        floor_rel: ROUNDOFF_REL.max(opts.noise_rel),
    };

    let mut acc = Accum {
        value: KahanSum::new(),
        err: KahanSum::new(),
        evals: 21,
    };
    refine(f, a, b, 0, &budget, &mut acc);
    QuadResult {
        value: acc.value.value(),
        abs_err: acc.err.value(),
        evals: acc.evals,
    }
}
