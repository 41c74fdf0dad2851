//! Versioned JSON file formats.
//!
//! Exact entries are `["re_num", "re_den", "im_num", "im_den"]` with
//! decimal-string integers; float entries are `[re, im]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::matrix::{ComplexFloat, GaussianRational as Q, Involution, Matrix, Scalar};
use crate::rect::Dims;
use crate::solvers::Sign;

use super::CliError;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Minus,
    Plus,
    SymRight,
    SymLeft,
    RectMinus,
    RectPlus,
}

impl Kind {
    pub const ALL: [Kind; 6] = [Kind::Minus, Kind::Plus, Kind::SymRight, Kind::SymLeft, Kind::RectMinus, Kind::RectPlus];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Minus => "minus",
            Kind::Plus => "plus",
            Kind::SymRight => "sym_right",
            Kind::SymLeft => "sym_left",
            Kind::RectMinus => "rect_minus",
            Kind::RectPlus => "rect_plus",
        }
    }

    /// Operand names in the instance file, in equation order.
    pub fn operand_names(self) -> &'static [&'static str] {
        match self {
            Kind::Minus | Kind::Plus => &["a", "b", "c"],
            Kind::SymRight | Kind::SymLeft => &["a", "b"],
            Kind::RectMinus | Kind::RectPlus => &["A", "B", "C"],
        }
    }

    pub fn is_rect(self) -> bool {
        matches!(self, Kind::RectMinus | Kind::RectPlus)
    }

    /// Sign of the two-sided form, `None` for the symmetric kinds.
    pub fn sign(self) -> Option<Sign> {
        match self {
            Kind::Minus | Kind::RectMinus => Some(Sign::Minus),
            Kind::Plus | Kind::RectPlus => Some(Sign::Plus),
            Kind::SymRight | Kind::SymLeft => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Kind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown kind {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            _ => Err(format!("unknown backend {s:?} (expected exact or float)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawEntry {
    Exact([String; 4]),
    Float([f64; 2]),
}

pub type RawMatrix = Vec<Vec<RawEntry>>;

/// A problem instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: String,
    pub kind: Kind,
    pub backend: Backend,
    pub involution: Involution,
    pub operands: BTreeMap<String, RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Dims>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A single matrix, as read by `mp` and accepted as a solution by `verify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub version: String,
    pub backend: Backend,
    pub involution: Involution,
    pub matrix: RawMatrix,
}

fn check_version(v: &str) -> Result<(), CliError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(CliError::Parse(format!("unsupported format version {v:?} (expected {FORMAT_VERSION:?})")))
    }
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let inst: InstanceFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        check_version(&inst.version)?;
        let expected = inst.kind.operand_names();
        let found: Vec<&str> = inst.operands.keys().map(String::as_str).collect();
        let mut sorted = expected.to_vec();
        sorted.sort_unstable();
        if found != sorted {
            return Err(CliError::Parse(format!("kind {} needs operands {expected:?}, found {found:?}", inst.kind)));
        }
        if inst.dims.is_some() && !inst.kind.is_rect() {
            return Err(CliError::Parse("dims only apply to rect kinds".into()));
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn operand<S: CliScalar>(&self, name: &str) -> Result<Matrix<S>, CliError> {
        let raw = self.operands.get(name).ok_or_else(|| CliError::Parse(format!("missing operand {name}")))?;
        matrix_from_raw(raw, self.involution)
    }
}

impl MatrixFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        check_version(&file.version)?;
        Ok(file)
    }

    pub fn of<S: CliScalar>(m: &Matrix<S>) -> Self {
        MatrixFile {
            version: FORMAT_VERSION.into(),
            backend: S::BACKEND,
            involution: m.involution(),
            matrix: matrix_to_raw(m),
        }
    }
}

/// Scalars that can be read from and written to the file formats.
pub trait CliScalar: Scalar {
    const BACKEND: Backend;

    fn to_raw(&self) -> RawEntry;
    fn from_raw(e: &RawEntry) -> Result<Self, CliError>;
}

fn parse_int(s: &str) -> Result<BigInt, CliError> {
    s.parse::<BigInt>().map_err(|_| CliError::Parse(format!("{s:?} is not a decimal integer")))
}

fn parse_ratio(num: &str, den: &str) -> Result<BigRational, CliError> {
    let den = parse_int(den)?;
    if den.is_zero() {
        return Err(CliError::Parse("zero denominator".into()));
    }
    Ok(BigRational::new(parse_int(num)?, den))
}

impl CliScalar for Q {
    const BACKEND: Backend = Backend::Exact;

    fn to_raw(&self) -> RawEntry {
        RawEntry::Exact([
            self.re.numer().to_string(),
            self.re.denom().to_string(),
            self.im.numer().to_string(),
            self.im.denom().to_string(),
        ])
    }

    fn from_raw(e: &RawEntry) -> Result<Self, CliError> {
        match e {
            RawEntry::Exact([rn, rd, im, id]) => Ok(Q::new(parse_ratio(rn, rd)?, parse_ratio(im, id)?)),
            RawEntry::Float(_) => Err(CliError::Parse("exact backend needs [re_num, re_den, im_num, im_den] entries".into())),
        }
    }
}

impl CliScalar for ComplexFloat {
    const BACKEND: Backend = Backend::Float;

    fn to_raw(&self) -> RawEntry {
        RawEntry::Float([self.re, self.im])
    }

    fn from_raw(e: &RawEntry) -> Result<Self, CliError> {
        match e {
            RawEntry::Float([re, im]) => Ok(ComplexFloat::new(*re, *im)),
            RawEntry::Exact(_) => Err(CliError::Parse("float backend needs [re, im] entries".into())),
        }
    }
}

pub fn matrix_from_raw<S: CliScalar>(raw: &RawMatrix, involution: Involution) -> Result<Matrix<S>, CliError> {
    let rows = raw
        .iter()
        .map(|row| row.iter().map(S::from_raw).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(rows, involution).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn matrix_to_raw<S: CliScalar>(m: &Matrix<S>) -> RawMatrix {
    m.to_rows().iter().map(|row| row.iter().map(CliScalar::to_raw).collect()).collect()
}

/// `--dims`: either `n` (square kinds) or `m,n,p` (rect kinds).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimsArg {
    Square(usize),
    Rect(Dims),
}

impl FromStr for DimsArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad dimension {p:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        match parts[..] {
            [n] => Ok(DimsArg::Square(n)),
            [m, n, p] => Ok(DimsArg::Rect(Dims::new(m, n, p))),
            _ => Err(format!("dims must be `n` or `m,n,p`, found {s:?}")),
        }
    }
}
