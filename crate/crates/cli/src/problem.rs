//! Problem files: one JSON object holding every input a command may need.

use std::path::Path;

use cumrate::cumfn::{validate_regular, KnotList, ValidationReport};
use cumrate::ratedist::{build_rd_curve, closed_form_curve, ClosedForm};
use cumrate::{CumulativeFunction, DistortionSpec, Mode, RdCurve, SourceModel};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crdf: Option<KnotList>,
    /// A knot list or the string `"unconstrained"`. Absent means unconstrained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cldf: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub mode: ModeChoice,
    pub curve: CurveChoice,
    /// Blahut-Arimoto slopes used when a curve has to be tabulated.
    pub rd_points: usize,
    pub grid_step: f64,
    /// Uniform alpha points in CSV tables, before knots are merged in.
    pub csv_points: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            mode: ModeChoice::Lossy,
            curve: CurveChoice::Auto,
            rd_points: 64,
            grid_step: 0.05,
            csv_points: 101,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    Lossy,
    Lossless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveChoice {
    /// Closed form when one exists, Blahut-Arimoto otherwise.
    Auto,
    ClosedForm,
    Sampled,
}

impl ProblemFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = if path == Path::new("-") {
            std::io::read_to_string(std::io::stdin())
        } else {
            std::fs::read_to_string(path)
        }
        .map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Raw validation of both functions, without rejecting anything.
    pub fn validation(&self) -> Result<(Option<ValidationReport>, Option<ValidationReport>), CliError> {
        let crdf = self.crdf.as_ref().map(|list| validate_regular(&list.knots));
        let cldf = match self.cldf_knots()? {
            Some(list) => {
                let mut report = validate_regular(&list.knots);
                // A leakage allowance may start above zero.
                report
                    .violations
                    .retain(|v| !matches!(v, cumrate::cumfn::Violation::ZeroInitialValue(_)));
                Some(report)
            }
            None => None,
        };
        Ok((crdf, cldf))
    }

    fn cldf_knots(&self) -> Result<Option<KnotList>, CliError> {
        match &self.cldf {
            None => Ok(None),
            Some(Value::String(s)) if s == "unconstrained" => Ok(None),
            Some(Value::String(s)) => Err(CliError::Field {
                field: "cldf",
                source: cumrate::Error::InvalidArgument(format!(
                    "expected a knot list or \"unconstrained\", got \"{s}\""
                )),
            }),
            Some(v) => Ok(Some(serde_json::from_value(v.clone())?)),
        }
    }

    pub fn crdf(&self) -> Result<CumulativeFunction, CliError> {
        let list = self.crdf.as_ref().ok_or(CliError::Missing("crdf"))?;
        CumulativeFunction::new(list.knots.clone()).map_err(|source| CliError::Field { field: "crdf", source })
    }

    pub fn cldf(&self) -> Result<CumulativeFunction, CliError> {
        match self.cldf_knots()? {
            None => Ok(CumulativeFunction::unconstrained()),
            Some(list) => CumulativeFunction::leakage(list.knots)
                .map_err(|source| CliError::Field { field: "cldf", source }),
        }
    }

    pub fn source(&self) -> Result<&SourceModel, CliError> {
        self.source.as_ref().ok_or(CliError::Missing("source"))
    }

    pub fn dbar(&self) -> Result<f64, CliError> {
        self.dbar.ok_or(CliError::Missing("dbar"))
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        Ok(match self.options.mode {
            ModeChoice::Lossy => Mode::Lossy,
            ModeChoice::Lossless => Mode::Lossless { entropy: self.source()?.entropy() },
        })
    }

    pub fn has_curve(&self) -> bool {
        self.source.is_some() && self.distortion.is_some()
    }

    /// The distortion-rate curve of the source under the distortion measure.
    pub fn curve(&self) -> Result<RdCurve, CliError> {
        let source = self.source()?;
        let spec = self.distortion.as_ref().ok_or(CliError::Missing("distortion"))?;
        let closed = match spec {
            DistortionSpec::Erasure => Some(ClosedForm::Erasure),
            DistortionSpec::LogLoss => Some(ClosedForm::LogLoss),
            DistortionSpec::Hamming if source.alphabet_size() == 2 => Some(ClosedForm::HammingBinary),
            _ => None,
        };
        let curve = match (self.options.curve, closed) {
            (CurveChoice::Sampled, _) | (CurveChoice::Auto, None) => {
                build_rd_curve(source, spec, self.options.rd_points)?
            }
            (_, Some(kind)) => closed_form_curve(kind, source).or_else(|e| match self.options.curve {
                CurveChoice::Auto => build_rd_curve(source, spec, self.options.rd_points),
                _ => Err(e),
            })?,
            (CurveChoice::ClosedForm, None) => {
                return Err(CliError::Core(cumrate::Error::UnsupportedClosedForm(
                    "no closed form for this distortion measure".into(),
                )))
            }
        };
        Ok(curve)
    }
}
