//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs, rel·|I|)` or the subdivision budget runs out.

/// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
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
    0.0,
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-10,
            max_subdivisions: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_err: f64,
    pub intervals: usize,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = 0.0;
    let mut kronrod = WGK[10] * fc;
    let mut abs_k = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_k * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &Tolerance) -> Quadrature {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrates over `[breaks[0], breaks[last]]`, starting with one panel per
/// consecutive pair of break points (kinks and discontinuities go here).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: &Tolerance) -> Quadrature {
    let mut segs: Vec<Segment> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (value, err) = kronrod21(&f, w[0], w[1]);
            Segment {
                a: w[0],
                b: w[1],
                value,
                err,
            }
        })
        .collect();
    if segs.is_empty() {
        return Quadrature {
            value: 0.0,
            abs_err: 0.0,
            intervals: 0,
            converged: true,
        };
    }

    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if err <= target {
            return Quadrature {
                value,
                abs_err: err,
                intervals: segs.len(),
                converged: true,
            };
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty");
        let s = &segs[worst];
        let mid = 0.5 * (s.a + s.b);
        if segs.len() >= tol.max_subdivisions || mid <= s.a || mid >= s.b {
            return Quadrature {
                value,
                abs_err: err,
                intervals: segs.len(),
                converged: false,
            };
        }
        let (a, b) = (s.a, s.b);
        let (lv, le) = kronrod21(&f, a, mid);
        let (rv, re) = kronrod21(&f, mid, b);
        segs[worst] = Segment {
            a,
            b: mid,
            value: lv,
            err: le,
        };
        segs.push(Segment {
            a: mid,
            b,
            value: rv,
            err: re,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| 3.0 * x * x - 2.0 * x + 1.0, 0.0, 2.0, &Tolerance::default());
        assert!((q.value - 6.0).abs() < 1e-13);
        assert!(q.converged);
    }

    #[test]
    fn gaussian_tail_probability() {
        // Q(3) = 1.3498980316301e-3
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let tol = Tolerance {
            abs: 1e-15,
            rel: 1e-12,
            ..Default::default()
        };
        let q = integrate(phi, 3.0, 40.0, &tol);
        assert!((q.value - 1.349_898_031_630_1e-3).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^(-1/2) dx = 2
        let tol = Tolerance {
            abs: 1e-9,
            rel: 1e-9,
            ..Default::default()
        };
        let q = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &tol);
        assert!((q.value - 2.0).abs() < 1e-8, "{q:?}");
    }

    #[test]
    fn kink_with_break_point() {
        let tol = Tolerance {
            abs: 1e-13,
            rel: 1e-13,
            ..Default::default()
        };
        let q = integrate_with_breaks(|x: f64| (-(x - 0.3).abs()).exp(), &[0.0, 0.3, 1.0], &tol);
        let exact = 2.0 - (-0.3f64).exp() - (-0.7f64).exp();
        assert!((q.value - exact).abs() < 1e-13);
        assert_eq!(q.intervals, 2);
    }

    #[test]
    fn empty_interval() {
        let q = integrate(|x| x, 1.0, 1.0, &Tolerance::default());
        assert_eq!(q.value, 0.0);
        assert!(q.converged);
    }
}
