//! Line-oriented `key = value` problem files.
//!
//! Keys: `n`, `m`, `r`, `chart` (homogeneous|adapted), `lagrangian`,
//! `equation` (repeatable, one component per line), `curve` (repeatable,
//! comma-separated components over the parameters `t1..`), `seed`,
//! `samples`. Lines starting with `#` are comments.

use jetvar_core::chart::{ChartSide, ChartSpec};
use jetvar_core::expr::{parse_params, Expr};
use jetvar_core::error::Result as CoreResult;

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub n: u16,
    pub m: u16,
    pub r: usize,
    pub side: ChartSide,
    pub lagrangian: Option<String>,
    pub equation: Vec<String>,
    pub curves: Vec<String>,
    pub suites: Vec<String>,
    pub seed: u64,
    pub samples: usize,
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut spec = ProblemSpec {
            n: 1,
            m: 1,
            r: 1,
            side: ChartSide::Adapted,
            lagrangian: None,
            equation: Vec::new(),
            curves: Vec::new(),
            suites: Vec::new(),
            seed: 0,
            samples: 25,
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| format!("line {}: bad {what} `{value}`", lineno + 1);
            match key {
                "n" => spec.n = value.parse().map_err(|_| bad("n"))?,
                "m" => spec.m = value.parse().map_err(|_| bad("m"))?,
                "r" => spec.r = value.parse().map_err(|_| bad("r"))?,
                "chart" => {
                    spec.side = match value {
                        "homogeneous" => ChartSide::Homogeneous,
                        "adapted" => ChartSide::Adapted,
                        _ => return Err(bad("chart")),
                    }
                }
                "lagrangian" => spec.lagrangian = Some(value.to_string()),
                "equation" => spec.equation.push(value.to_string()),
                "curve" => spec.curves.push(value.to_string()),
                "suite" => spec.suites.push(value.to_string()),
                "seed" => spec.seed = value.parse().map_err(|_| bad("seed"))?,
                "samples" => spec.samples = value.parse().map_err(|_| bad("samples"))?,
                other => return Err(format!("line {}: unknown key `{other}`", lineno + 1)),
            }
        }
        Ok(spec)
    }

    pub fn validate(&self, max_order: usize) -> Result<(), String> {
        if self.n == 0 || self.n > 3 || self.m == 0 || self.m > 3 {
            return Err("n and m must lie in 1..=3".into());
        }
        if self.r == 0 || self.r > max_order.min(3) {
            return Err(format!("r must lie in 1..={}", max_order.min(3)));
        }
        if self.lagrangian.is_some() && !self.equation.is_empty() {
            return Err("give either a lagrangian or an equation, not both".into());
        }
        Ok(())
    }

    pub fn chart_spec(&self) -> ChartSpec {
        ChartSpec { n: self.n, m: self.m, r: self.r, side: self.side }
    }

    /// Parses one `curve` entry into its `n + m` components.
    pub fn parse_curve(&self, entry: &str) -> CoreResult<Vec<Expr>> {
        entry
            .split(',')
            .map(|part| parse_params(part.trim(), self.n))
            .collect()
    }

    pub fn echo_into(&self, doc: &mut crate::output::OutputDoc) {
        doc.kv("n", &self.n.to_string());
        doc.kv("m", &self.m.to_string());
        doc.kv("r", &self.r.to_string());
        doc.kv(
            "chart",
            match self.side {
                ChartSide::Homogeneous => "homogeneous",
                ChartSide::Adapted => "adapted",
                ChartSide::Mixed => "mixed",
            },
        );
        if let Some(lag) = &self.lagrangian {
            doc.kv("lagrangian", lag);
        }
        for eq in &self.equation {
            doc.kv("equation", eq);
        }
        for c in &self.curves {
            doc.kv("curve", c);
        }
    }
}
