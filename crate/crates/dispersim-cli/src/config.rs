//! Experiment configuration: a single JSON file describing the model, the
//! grid, the initial data and the study to run.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use dispersim::evolution::RunConfig;
use dispersim::grid::Grid2D;
use dispersim::initial;
use dispersim::nonlinear::NonlinearCoefficients;
use dispersim::{Complex64, DispersiveSymbol, ModelPreset, SpectralField};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub initial_data: InitialData,
    #[serde(default)]
    pub epsilon: f64,
    pub s: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_picard_max_iters")]
    pub picard_max_iters: usize,
    #[serde(default = "default_quadrature_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default)]
    pub snapshot_stride: usize,
    pub output_dir: String,
    #[serde(default)]
    pub seed: u64,

    /// Continuation: strictly decreasing ε ladder (last entry may be 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_ladder: Option<Vec<f64>>,
    /// Gauge growth: fixed cutoff; omit to calibrate on the initial data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Smoothing: packet carriers along axis 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carriers: Option<Vec<f64>>,
    /// Smoothing: time-quadrature nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_nodes: Option<usize>,
    /// Smoothing: window radius around the domain center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_radius: Option<f64>,
    /// Convergence: refinement axis and ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
    /// Estimate probe: grid sizes, band limit and trial count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
}

fn default_picard_tol() -> f64 {
    1e-10
}

fn default_picard_max_iters() -> usize {
    50
}

fn default_quadrature_nodes() -> usize {
    9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    Continuation,
    Smoothing,
    GaugeGrowth,
    Convergence,
    EstimateProbe,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Continuation => "continuation",
            ExperimentKind::Smoothing => "smoothing",
            ExperimentKind::GaugeGrowth => "gauge-growth",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::EstimateProbe => "estimate-probe",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    /// Hogan: the eight reals `b1..b5, mu1..mu3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    /// Custom: homogeneous symbol parts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p3: Option<f64>,
    /// Custom: couplings `a0..a3` as `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<[[f64; 2]; 4]>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelPreset> {
        match self.name.as_str() {
            "custom" => {
                let p0 = self.p0.context("custom model needs p0")?;
                let p1 = self.p1.unwrap_or([0.0; 3]);
                let p2 = self.p2.unwrap_or([0.0; 2]);
                let p3 = self.p3.unwrap_or(0.0);
                let a = self.coefficients.context("custom model needs coefficients")?;
                Ok(ModelPreset {
                    name: "custom".to_string(),
                    symbol: DispersiveSymbol::new(p0, p1, p2, p3),
                    coefficients: NonlinearCoefficients::new(
                        Complex64::new(a[0][0], a[0][1]),
                        Complex64::new(a[1][0], a[1][1]),
                        Complex64::new(a[2][0], a[2][1]),
                        Complex64::new(a[3][0], a[3][1]),
                    ),
                })
            }
            name => {
                let params = self.params.clone().unwrap_or_default();
                Ok(dispersim::preset(name, &params)?)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n1: usize,
    pub n2: usize,
    #[serde(default = "default_side")]
    pub l1: f64,
    #[serde(default = "default_side")]
    pub l2: f64,
}

fn default_side() -> f64 {
    2.0 * std::f64::consts::PI
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid2D> {
        Ok(Grid2D::new(self.n1, self.n2, self.l1, self.l2)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    GaussianPacket {
        amplitude: f64,
        center: [f64; 2],
        carrier: [f64; 2],
        width: f64,
        /// Rescale so `‖u0‖_{H³}` hits this value.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h3_norm: Option<f64>,
    },
    PlaneWave {
        amplitude: [f64; 2],
        mode: [i64; 2],
    },
    RandomBandLimited {
        kmax: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h3_norm: Option<f64>,
    },
    File {
        path: String,
    },
}

impl InitialData {
    pub fn build(&self, grid: &Grid2D, seed: u64) -> Result<SpectralField> {
        let field = match self {
            InitialData::GaussianPacket { amplitude, center, carrier, width, h3_norm } => {
                let u = initial::gaussian_packet(grid, *amplitude, *center, *carrier, *width);
                match h3_norm {
                    Some(target) => rescale_h3(&u, *target)?,
                    None => u,
                }
            }
            InitialData::PlaneWave { amplitude, mode } => {
                initial::plane_wave(grid, Complex64::new(amplitude[0], amplitude[1]), *mode)
            }
            InitialData::RandomBandLimited { kmax, h3_norm } => {
                let u = initial::random_band_limited(grid, *kmax, seed);
                match h3_norm {
                    Some(target) => rescale_h3(&u, *target)?,
                    None => u,
                }
            }
            InitialData::File { path } => {
                let u = dispersim::snapshot::read_field(path)
                    .with_context(|| format!("reading initial data from {path}"))?;
                if u.grid() != grid {
                    bail!(
                        "initial-data file grid {} does not match the configured grid {}",
                        u.grid().shape(),
                        grid.shape()
                    );
                }
                u
            }
        };
        Ok(field)
    }
}

fn rescale_h3(u: &SpectralField, target: f64) -> Result<SpectralField> {
    let norm = u.sobolev_norm(3.0);
    if norm == 0.0 {
        bail!("cannot normalize a zero field");
    }
    Ok(u.scale(Complex64::new(target / norm, 0.0)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// One of `grid`, `dt`, `epsilon`.
    pub axis: String,
    pub ladder: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "default_probe_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_probe_kmax")]
    pub kmax: i64,
    #[serde(default = "default_probe_trials")]
    pub trials: u64,
}

fn default_probe_sizes() -> Vec<usize> {
    vec![16, 32, 64]
}

fn default_probe_kmax() -> i64 {
    6
}

fn default_probe_trials() -> u64 {
    6
}

impl ExperimentConfig {
    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {path}"))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config file {path}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.run_config().validate()?;
        match self.kind {
            ExperimentKind::Continuation if self.epsilon_ladder.is_none() => {
                bail!("continuation runs need `epsilon_ladder`")
            }
            ExperimentKind::Convergence if self.study.is_none() => {
                bail!("convergence runs need `study`")
            }
            _ => Ok(()),
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            epsilon: self.epsilon,
            s: self.s,
            dt: self.dt,
            t_end: self.t_end,
            picard_tol: self.picard_tol,
            picard_max_iters: self.picard_max_iters,
            quadrature_nodes: self.quadrature_nodes,
            snapshot_stride: self.snapshot_stride,
        }
    }

    /// Human-readable echo of every consumed field, for the summary.
    pub fn echo(&self) -> String {
        let mut out = String::from("[config]\n");
        out.push_str(&format!("kind = {}\n", self.kind.as_str()));
        out.push_str(&format!("model = {}\n", self.model.name));
        if let Some(p) = &self.model.params {
            out.push_str(&format!("model.params = {p:?}\n"));
        }
        if self.model.name == "custom" {
            out.push_str(&format!(
                "model.p0 = {:?}, p1 = {:?}, p2 = {:?}, p3 = {:?}\n",
                self.model.p0, self.model.p1, self.model.p2, self.model.p3
            ));
            out.push_str(&format!("model.coefficients = {:?}\n", self.model.coefficients));
        }
        out.push_str(&format!(
            "grid = {}x{} on [0,{})x[0,{})\n",
            self.grid.n1, self.grid.n2, self.grid.l1, self.grid.l2
        ));
        out.push_str(&format!("initial_data = {}\n", serde_json::to_string(&self.initial_data).unwrap()));
        out.push_str(&format!("epsilon = {}\n", self.epsilon));
        out.push_str(&format!("s = {}\n", self.s));
        out.push_str(&format!("dt = {}\n", self.dt));
        out.push_str(&format!("t_end = {}\n", self.t_end));
        out.push_str(&format!("picard_tol = {}\n", self.picard_tol));
        out.push_str(&format!("picard_max_iters = {}\n", self.picard_max_iters));
        out.push_str(&format!("quadrature_nodes = {}\n", self.quadrature_nodes));
        out.push_str(&format!("snapshot_stride = {}\n", self.snapshot_stride));
        out.push_str(&format!("output_dir = {}\n", self.output_dir));
        out.push_str(&format!("seed = {}\n", self.seed));
        if let Some(l) = &self.epsilon_ladder {
            out.push_str(&format!("epsilon_ladder = {l:?}\n"));
        }
        if let Some(l) = self.lambda {
            out.push_str(&format!("lambda = {l}\n"));
        }
        if let Some(cs) = &self.carriers {
            out.push_str(&format!("carriers = {cs:?}\n"));
        }
        if let Some(tn) = self.time_nodes {
            out.push_str(&format!("time_nodes = {tn}\n"));
        }
        if let Some(wr) = self.window_radius {
            out.push_str(&format!("window_radius = {wr}\n"));
        }
        if let Some(st) = &self.study {
            out.push_str(&format!("study.axis = {}, study.ladder = {:?}\n", st.axis, st.ladder));
        }
        if let Some(p) = &self.probe {
            out.push_str(&format!(
                "probe.sizes = {:?}, probe.kmax = {}, probe.trials = {}\n",
                p.sizes, p.kmax, p.trials
            ));
        }
        out
    }
}
