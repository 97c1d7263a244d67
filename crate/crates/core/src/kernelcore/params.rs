use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamMode {
    /// Constants satisfy every Setup inequality of the existence proof.
    Strict,
    /// Relaxed constants; feasibility of each construction step is checked at runtime.
    Practical,
}

/// Constants driving the clean / sample / balance pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub epsilon: f64,
    pub beta: f64,
    pub lambda: f64,
    pub delta: f64,
    pub alpha: f64,
    /// Rounding granularity; even.
    pub gamma: u64,
    /// Order of the sampled graph.
    pub m: usize,
    /// Order of the output graph.
    pub n: usize,
    /// Number of clusters of the shared profile (`M`).
    pub clusters: usize,
    pub mode: ParamMode,
}

impl PipelineParams {
    /// Cluster footprint threshold `delta / M` below which a cluster is emptied.
    pub fn footprint_threshold(&self) -> f64 {
        self.delta / self.clusters.max(1) as f64
    }

    /// Base-2 logarithm of the sample-size lower bound
    /// `10^4 M^2 2^(1000/beta^2) / (beta^2 lambda^3 delta^4)`.
    pub fn setup_m_bound_log2(&self) -> f64 {
        let m = self.clusters.max(1) as f64;
        4.0 * 10f64.log2() + 2.0 * m.log2() + 1000.0 / (self.beta * self.beta)
            - 2.0 * self.beta.log2()
            - 3.0 * self.lambda.log2()
            - 4.0 * self.delta.log2()
    }

    fn order_violation(&self) -> Option<String> {
        let (b, m, n) = (self.beta, self.m as f64, self.n as f64);
        if (1.0 + b) * m > n || n > (1.0 + 2.0 * b) * m {
            Some(format!(
                "(1+beta)m <= n <= (1+2beta)m fails: m={}, n={}, beta={b}",
                self.m, self.n
            ))
        } else {
            None
        }
    }

    /// Every Setup inequality of the existence proof that these constants violate.
    pub fn strict_violations(&self) -> Vec<String> {
        let (b, l, d, a) = (self.beta, self.lambda, self.delta, self.alpha);
        let mut out = Vec::new();
        if b > 1e-3 {
            out.push(format!("beta <= 1/1000 fails: beta={b}"));
        }
        if l > b.powi(3) / 1000.0 {
            out.push(format!("lambda <= beta^3/1000 fails: lambda={l}"));
        }
        if d > b * b * l * l {
            out.push(format!("delta <= beta^2 lambda^2 fails: delta={d}"));
        }
        let gap = b - a;
        if gap < 20.0 * l || gap > b.powi(3) / 5.0 {
            out.push(format!(
                "beta-alpha in [20 lambda, beta^3/5] fails: beta-alpha={gap}"
            ));
        }
        let need = self.setup_m_bound_log2();
        if (self.m.max(1) as f64).log2() < need {
            out.push(format!(
                "m >= 10^4 M^2 2^(1000/beta^2)/(beta^2 lambda^3 delta^4) fails: log2 m={:.3}, log2 bound={need:.3e}",
                (self.m.max(1) as f64).log2()
            ));
        }
        if self.gamma % 2 != 0 || self.gamma == 0 {
            out.push(format!("Gamma even and positive fails: Gamma={}", self.gamma));
        }
        if (self.gamma as f64) < d.powi(-2) {
            out.push(format!(
                "Gamma >= delta^-2 fails: Gamma={}, delta^-2={:.3e}",
                self.gamma,
                d.powi(-2)
            ));
        }
        if (self.m as f64) < self.gamma as f64 * self.clusters as f64 / (d * d) {
            out.push(format!(
                "m >= Gamma M/delta^2 fails: m={}, bound={:.3e}",
                self.m,
                self.gamma as f64 * self.clusters as f64 / (d * d)
            ));
        }
        out.extend(self.order_violation());
        out
    }

    /// Conditions required in practical mode.
    pub fn practical_violations(&self) -> Vec<String> {
        let (b, l, a) = (self.beta, self.lambda, self.alpha);
        let mut out = Vec::new();
        if !(0.0 < a && a < b && b < 0.5) {
            out.push(format!("0 < alpha < beta < 1/2 fails: alpha={a}, beta={b}"));
        }
        if !(l > 0.0) {
            out.push(format!("lambda > 0 fails: lambda={l}"));
        }
        if !(self.delta > 0.0) {
            out.push(format!("delta > 0 fails: delta={}", self.delta));
        }
        if self.gamma == 0 || self.gamma % 2 != 0 {
            out.push(format!("Gamma even and positive fails: Gamma={}", self.gamma));
        }
        if self.clusters == 0 {
            out.push("at least one cluster required".into());
        }
        out.extend(self.order_violation());
        out
    }

    pub fn violations(&self) -> Vec<String> {
        match self.mode {
            ParamMode::Strict => self.strict_violations(),
            ParamMode::Practical => self.practical_violations(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::SetupInfeasible { violations })
        }
    }
}
