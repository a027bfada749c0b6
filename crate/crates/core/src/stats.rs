//! Summary statistics over loss traces.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); zero for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Number of trailing entries making up the last `fraction` of a trace of
/// `len` entries (at least one).
pub fn tail_len(len: usize, fraction: f64) -> usize {
    ((len as f64 * fraction).ceil() as usize).clamp(1, len.max(1))
}

/// Mean over the last `fraction` of the trace.
pub fn tail_mean(xs: &[f64], fraction: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let k = tail_len(xs.len(), fraction);
    mean(&xs[xs.len() - k..])
}

/// Which part of a loss trace a summary statistic averages over.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Window {
    /// The trailing fraction of the trace.
    LastFraction { fraction: f64 },
    /// Zero-based half-open index range `[start, end)` into the trace.
    Range { start: usize, end: usize },
}

impl Default for Window {
    fn default() -> Self {
        Window::LastFraction { fraction: 0.1 }
    }
}

impl Window {
    pub fn slice<'a>(&self, xs: &'a [f64]) -> &'a [f64] {
        match *self {
            Window::LastFraction { fraction } => {
                if xs.is_empty() {
                    xs
                } else {
                    &xs[xs.len() - tail_len(xs.len(), fraction)..]
                }
            }
            Window::Range { start, end } => {
                let end = end.min(xs.len());
                &xs[start.min(end)..end]
            }
        }
    }

    pub fn mean(&self, xs: &[f64]) -> f64 {
        mean(self.slice(xs))
    }
}
