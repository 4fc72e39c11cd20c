//! Scenario files: one TOML document describing weather, seller types, buyer
//! and grid. Unknown fields are rejected everywhere.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use procure_core::mechanism::DEFAULT_CELLS;
use procure_core::weather::DEFAULT_POINTS;
use procure_core::{
    BuyerUtility, CostModel, ProcurementProblem, SellerType, SimpleCost, TypeSpace, WeatherModel, WindConventionalCost,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub weather: WeatherSpec,
    pub cost_model: CostModelSpec,
    pub types: Vec<TypeSpec>,
    pub buyer: BuyerSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeatherSpec {
    Weibull {
        shape: f64,
        mean: f64,
        #[serde(default = "default_points")]
        n_points: usize,
    },
    Empirical {
        samples: Vec<f64>,
    },
}

fn default_points() -> usize {
    DEFAULT_POINTS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostModelSpec {
    Simple,
    WindConventional,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeSpec {
    pub id: String,
    /// Omitted on every type means a uniform prior.
    #[serde(default)]
    pub prior: Option<f64>,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuyerSpec {
    Affine { a: f64, b: f64 },
    PiecewiseLinear { breakpoints: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_cells")]
    pub n_cells: usize,
    #[serde(default)]
    pub q_max: Option<f64>,
}

fn default_cells() -> usize {
    DEFAULT_CELLS
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_cells: DEFAULT_CELLS,
            q_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Risk-sharing level for the settlement report; no report when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Type ids the contract is designed for; all types when absent.
    #[serde(default)]
    pub admissible: Option<Vec<String>>,
    #[serde(default)]
    pub exclusion_search: bool,
    #[serde(default = "default_max_subsets")]
    pub max_subsets: usize,
    /// Verify a copy of the solution whose upper-half prices are scaled by
    /// this factor. Used for fixtures that must fail.
    #[serde(default)]
    pub negative_control: Option<f64>,
    #[serde(default)]
    pub out: Option<String>,
}

fn default_max_subsets() -> usize {
    4096
}

impl Default for Options {
    fn default() -> Self {
        Options {
            alpha: None,
            admissible: None,
            exclusion_search: false,
            max_subsets: default_max_subsets(),
            negative_control: None,
            out: None,
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Scenario(e.message().to_string() + &span_hint(text, e.span())))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::Scenario(format!("{} is not valid UTF-8", path.display())))?;
        Ok((Scenario::from_toml(text)?, bytes))
    }

    pub fn model(&self) -> Arc<dyn CostModel> {
        match self.cost_model {
            CostModelSpec::Simple => Arc::new(SimpleCost),
            CostModelSpec::WindConventional => Arc::new(WindConventionalCost),
        }
    }

    pub fn weather(&self) -> Result<WeatherModel, CliError> {
        let m = match &self.weather {
            WeatherSpec::Weibull { shape, mean, n_points } => WeatherModel::weibull(*shape, *mean, *n_points),
            WeatherSpec::Empirical { samples } => WeatherModel::empirical(samples),
        };
        m.map_err(|e| field("weather", e))
    }

    pub fn buyer(&self) -> Result<BuyerUtility, CliError> {
        let b = match &self.buyer {
            BuyerSpec::Affine { a, b } => BuyerUtility::affine(*a, *b),
            BuyerSpec::PiecewiseLinear { breakpoints } => BuyerUtility::piecewise_linear(breakpoints.clone()),
        };
        b.map_err(|e| field("buyer", e))
    }

    pub fn type_space(&self) -> Result<TypeSpace, CliError> {
        let model = self.model();
        let names = model.param_names();
        if self.types.is_empty() {
            return Err(CliError::Scenario("types: at least one type is required".into()));
        }
        let given = self.types.iter().filter(|t| t.prior.is_some()).count();
        if given != 0 && given != self.types.len() {
            return Err(CliError::Scenario(
                "types: give a prior for every type or for none (uniform)".into(),
            ));
        }
        let uniform = 1.0 / self.types.len() as f64;
        let mut types = Vec::with_capacity(self.types.len());
        for (i, t) in self.types.iter().enumerate() {
            if let Some(unknown) = t.params.keys().find(|k| !names.contains(&k.as_str())) {
                return Err(CliError::Scenario(format!(
                    "types[{i}].params.{unknown}: unknown parameter for cost model {} (expected {})",
                    model.name(),
                    names.join(", ")
                )));
            }
            let mut params = Vec::with_capacity(names.len());
            for n in names {
                match t.params.get(*n) {
                    Some(v) => params.push(*v),
                    None => return Err(CliError::Scenario(format!("types[{i}].params.{n}: missing"))),
                }
            }
            let prior = t.prior.unwrap_or(uniform);
            if !(0.0..=1.0).contains(&prior) {
                return Err(CliError::Scenario(format!("types[{i}].prior: {prior} must lie in [0, 1]")));
            }
            let x = SellerType::new(t.id.clone(), params, prior);
            model.validate_type(&x).map_err(|e| field(&format!("types[{i}]"), e))?;
            types.push(x);
        }
        TypeSpace::new(types, model.as_ref()).map_err(|e| field("types", e))
    }

    /// Builds the instance; `n_cells` overrides the grid section.
    pub fn problem(&self, n_cells: Option<usize>) -> Result<ProcurementProblem, CliError> {
        let buyer = self.buyer()?;
        let n = n_cells.unwrap_or(self.grid.n_cells);
        let grid = ProcurementProblem::default_grid(&buyer, self.grid.q_max, n).map_err(|e| field("grid", e))?;
        ProcurementProblem::new(self.type_space()?, self.model(), self.weather()?, buyer, grid).map_err(CliError::Core)
    }

    /// Indices of the admissible ids, or `None` for all types.
    pub fn admissible_indices(&self, space: &TypeSpace, ids: Option<&[String]>) -> Result<Option<Vec<usize>>, CliError> {
        let Some(ids) = ids.or(self.options.admissible.as_deref()) else {
            return Ok(None);
        };
        ids.iter()
            .map(|id| {
                space
                    .index_of(id)
                    .ok_or_else(|| CliError::Scenario(format!("options.admissible: unknown type id {id:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn field(name: &str, e: procure_core::Error) -> CliError {
    CliError::Scenario(format!("{name}: {e}"))
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [weather]
        kind = "weibull"
        shape = 3.0
        mean = 5.0

        [cost_model]
        kind = "simple"

        [[types]]
        id = "x"
        params = { c0 = 4.0, theta_c = 1.2, gamma = 1.0 }

        [buyer]
        kind = "affine"
        a = 1.5
        b = 0.004
    "#;

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!(s.grid.n_cells, DEFAULT_CELLS);
        assert_eq!(s.weather, WeatherSpec::Weibull { shape: 3.0, mean: 5.0, n_points: DEFAULT_POINTS });
        let space = s.type_space().unwrap();
        assert_eq!(space.types()[0].prior, 1.0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = MINIMAL.replace("b = 0.004", "b = 0.004\nc = 1.0");
        let err = Scenario::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("unknown field"), "{err}");
        let bad = MINIMAL.replace("gamma = 1.0", "gamma = 1.0, theta_w = 0.1");
        let err = Scenario::from_toml(&bad).unwrap().type_space().unwrap_err().to_string();
        assert!(err.contains("types[0].params.theta_w"), "{err}");
    }

    #[test]
    fn missing_buyer_is_a_configuration_error() {
        let cut = MINIMAL.split("[buyer]").next().unwrap();
        let err = Scenario::from_toml(cut).unwrap_err().to_string();
        assert!(err.contains("buyer"), "{err}");
    }

    #[test]
    fn negative_prior_names_the_field() {
        let two = MINIMAL.replace(
            "params = { c0 = 4.0, theta_c = 1.2, gamma = 1.0 }",
            "prior = -0.5\nparams = { c0 = 4.0, theta_c = 1.2, gamma = 1.0 }\n[[types]]\nid = \"y\"\nprior = 1.5\nparams = { c0 = 4.0, theta_c = 1.2, gamma = 2.0 }",
        );
        let err = Scenario::from_toml(&two).unwrap().type_space().unwrap_err().to_string();
        assert!(err.contains("types[0].prior"), "{err}");
    }
}
