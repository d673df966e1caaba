//! JSON job configurations.  Complex numbers are [re, im] pairs and
//! matrices are nested row-major arrays of pairs.  Unknown fields are
//! rejected so typos fail loudly at parse time.

use num_complex::Complex64;
use serde::Deserialize;

use thetakit::finite_gap::{Grid, LLData, WaveData};
use thetakit::hyperelliptic::{CurvePoint, Sheet};
use thetakit::kirchhoff::{ClebschParams, Method, RigidState, SteklovParams};
use thetakit::theta::{Characteristic, RiemannMatrix};

pub type CPair = [f64; 2];

pub fn c64(p: CPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn cvec(v: &[CPair]) -> Vec<Complex64> {
    v.iter().map(|&p| c64(p)).collect()
}

pub fn riemann_matrix(rows: &[Vec<CPair>]) -> Result<RiemannMatrix, String> {
    let converted: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&p| c64(p)).collect())
        .collect();
    RiemannMatrix::new(&converted).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacteristicSpec {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl CharacteristicSpec {
    pub fn build(&self) -> Characteristic {
        Characteristic::new(self.alpha.clone(), self.beta.clone())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaEvalConfig {
    pub b: Vec<Vec<CPair>>,
    pub z: Vec<CPair>,
    #[serde(default)]
    pub characteristic: Option<CharacteristicSpec>,
    #[serde(default)]
    pub derivative: Option<Vec<u32>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGridConfig {
    pub b: Vec<Vec<CPair>>,
    pub z_start: Vec<CPair>,
    pub z_step: Vec<CPair>,
    pub count: usize,
    #[serde(default)]
    pub characteristic: Option<CharacteristicSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub omega1: CPair,
    pub omega2: CPair,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WpConfig {
    #[serde(flatten)]
    pub lattice: LatticeConfig,
    pub z: Vec<CPair>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticBuildConfig {
    pub b: CPair,
    pub kind: String,
    #[serde(default)]
    pub zeros: Vec<CPair>,
    #[serde(default)]
    pub poles: Vec<CPair>,
    #[serde(default)]
    pub residues: Vec<CPair>,
    pub constant: CPair,
    pub eval_points: Vec<CPair>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub xi: CPair,
    pub sheet: String,
}

impl PointSpec {
    pub fn build(&self) -> Result<CurvePoint, String> {
        let sheet = match self.sheet.as_str() {
            "plus" | "+" => Sheet::Plus,
            "minus" | "-" => Sheet::Minus,
            other => return Err(format!("unknown sheet tag '{other}'")),
        };
        Ok(CurvePoint::new(c64(self.xi), sheet))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub branch_points: Vec<CPair>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbelMapConfig {
    pub branch_points: Vec<CPair>,
    pub point: PointSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertConfig {
    pub branch_points: Vec<CPair>,
    pub z: Vec<CPair>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThirdKindConfig {
    pub branch_points: Vec<CPair>,
    pub pole_plus: PointSpec,
    pub pole_minus: PointSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaConfig {
    pub branch_points: Vec<CPair>,
    pub divisor: Vec<PointSpec>,
    pub singular_point: PointSpec,
    pub principal: Vec<CPair>,
    pub eval_points: Vec<PointSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub b: Vec<Vec<CPair>>,
    pub u: Vec<CPair>,
    pub v: Vec<CPair>,
    pub w: Vec<CPair>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub c_offset: f64,
    #[serde(default)]
    pub branch_integer: i64,
}

impl WaveSpec {
    pub fn build(&self) -> Result<WaveData, String> {
        let b = riemann_matrix(&self.b)?;
        WaveData::new(
            b,
            cvec(&self.u),
            cvec(&self.v),
            cvec(&self.w),
            Characteristic::new(self.alpha.clone(), self.beta.clone()),
            self.c_offset,
            self.branch_integer,
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

impl GridSpec {
    pub fn build(&self) -> Grid {
        Grid::linspace(self.x0, self.x1, self.nx, self.t0, self.t1, self.nt)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgEvalConfig {
    pub wave: WaveSpec,
    pub grid: GridSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgFitConfig {
    pub initial: WaveSpec,
    pub grid: GridSpec,
    pub budget: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlEvalConfig {
    pub b: Vec<Vec<CPair>>,
    pub u: Vec<CPair>,
    pub v: Vec<CPair>,
    pub d: Vec<CPair>,
    pub m_shift: Vec<CPair>,
    pub r_shift: Vec<CPair>,
    pub grid: GridSpec,
}

impl LlEvalConfig {
    pub fn build(&self) -> Result<LLData, String> {
        LLData::new(
            riemann_matrix(&self.b)?,
            cvec(&self.u),
            cvec(&self.v),
            cvec(&self.d),
            cvec(&self.m_shift),
            cvec(&self.r_shift),
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KirchhoffIntegrateConfig {
    pub case: String,
    #[serde(default)]
    pub a: Option<[f64; 3]>,
    pub b: [f64; 3],
    #[serde(default)]
    pub big_a: Option<f64>,
    #[serde(default)]
    pub big_b: Option<f64>,
    #[serde(default)]
    pub big_c: Option<f64>,
    pub initial_p: [f64; 3],
    pub initial_l: [f64; 3],
    pub t_end: f64,
    pub step: f64,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_method() -> String {
    "rk4".into()
}

fn default_sample_every() -> usize {
    10
}

pub enum KirchhoffCase {
    Clebsch(ClebschParams),
    Steklov(SteklovParams),
}

impl KirchhoffIntegrateConfig {
    pub fn build(&self) -> Result<(KirchhoffCase, RigidState, Method), String> {
        let case = match self.case.as_str() {
            "clebsch" => {
                let a = self
                    .a
                    .ok_or_else(|| "clebsch case requires the field 'a'".to_string())?;
                KirchhoffCase::Clebsch(ClebschParams::new(a, self.b).map_err(|e| e.to_string())?)
            }
            "steklov" => KirchhoffCase::Steklov(SteklovParams::new(
                self.big_a
                    .ok_or_else(|| "steklov case requires 'big_a'".to_string())?,
                self.big_b.unwrap_or(0.0),
                self.big_c.unwrap_or(0.0),
                self.b,
            )),
            other => return Err(format!("unknown case '{other}'")),
        };
        let method = match self.method.as_str() {
            "rk4" => Method::Rk4,
            "rkf45" => Method::Rkf45,
            other => return Err(format!("unknown method '{other}'")),
        };
        Ok((
            case,
            RigidState::new(self.initial_p, self.initial_l),
            method,
        ))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub constants: [f64; 4],
    pub b: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SFlowConfig {
    pub constants: [f64; 4],
    pub b: [f64; 3],
    pub a_const: f64,
    pub b_const: f64,
    pub initial: [CPair; 2],
    pub t_end: f64,
    pub step: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}
