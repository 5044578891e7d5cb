use std::f64::consts::PI;

use num_complex::Complex64;

/// A real number held as `sign · exp(log_abs)`, or an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogValue {
    Zero,
    Finite { log_abs: f64, sign: f64 },
}

impl LogValue {
    pub fn one() -> Self {
        LogValue::Finite { log_abs: 0.0, sign: 1.0 }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogValue::Zero
        } else {
            LogValue::Finite { log_abs: x.abs().ln(), sign: x.signum() }
        }
    }

    pub fn value(self) -> f64 {
        match self {
            LogValue::Zero => 0.0,
            LogValue::Finite { log_abs, sign } => sign * log_abs.exp(),
        }
    }

    pub fn mul(self, other: Self) -> Self {
        match (self, other) {
            (LogValue::Finite { log_abs: a, sign: s }, LogValue::Finite { log_abs: b, sign: t }) => {
                LogValue::Finite { log_abs: a + b, sign: s * t }
            }
            _ => LogValue::Zero,
        }
    }
}

/// `log Π_{j<k} (z + j)` with the sign tracked separately.
pub fn log_pochhammer(z: f64, k: u64) -> LogValue {
    let mut acc = LogValue::one();
    for j in 0..k {
        acc = acc.mul(LogValue::from_f64(z + j as f64));
        if acc == LogValue::Zero {
            break;
        }
    }
    acc
}

/// Complex logarithm of the rising factorial; `None` when a factor vanishes.
pub fn log_pochhammer_complex(z: Complex64, k: u64) -> Option<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..k {
        let f = z + j as f64;
        if f == Complex64::new(0.0, 0.0) {
            return None;
        }
        acc += f.ln();
    }
    Some(acc)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex log-Gamma (Lanczos with reflection). The real part is `log|Γ(z)|`;
/// the imaginary part is a phase defined modulo 2π.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// `log n!`, exact summation for small `n`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        ln_gamma(Complex64::new(n as f64 + 1.0, 0.0)).re
    }
}
