use std::path::PathBuf;

use super::{HarnessError, DEFAULT_CATALOG};
use crate::detectors::Budget;
use crate::metric::Dist;

/// Settings for a suite run, read from a flat `key = value` file.
///
/// Keys: `horizon`, `delta_grid`, `m_max`, `eps_grid`, `work_cap` (budget);
/// `catalog` (`default` or a comma list of names), `systems` (extra names),
/// `system_file` (repeatable path to a system file), `theorems`, `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessConfig {
    pub budget: Budget,
    pub catalog: Vec<String>,
    pub system_files: Vec<PathBuf>,
    pub theorems: String,
    pub ns: Vec<usize>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            budget: Budget::default(),
            catalog: DEFAULT_CATALOG.iter().map(|s| s.to_string()).collect(),
            system_files: Vec::new(),
            theorems: "all".into(),
            ns: vec![2],
        }
    }
}

/// Expands `default` and comma lists into catalog names.
pub fn catalog_names(selector: &str) -> Vec<String> {
    selector
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .flat_map(|s| {
            if s == "default" {
                DEFAULT_CATALOG.iter().map(|d| d.to_string()).collect()
            } else {
                vec![s.to_string()]
            }
        })
        .collect()
}

pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, HarnessError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| HarnessError::Config(format!("{key}: `{s}`: {e}"))))
        .collect()
}

impl HarnessConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = HarnessConfig::default();
        let mut extra = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let one = |v: &str| -> Result<u64, HarnessError> {
                v.parse().map_err(|e| HarnessError::Config(format!("{key}: {e}")))
            };
            match key {
                "horizon" => cfg.budget.horizon = one(value)? as usize,
                "m_max" => cfg.budget.m_max = one(value)? as usize,
                "work_cap" => cfg.budget.work_cap = one(value)?,
                "delta_grid" => cfg.budget.delta_grid = parse_list::<Dist>(key, value)?,
                "eps_grid" => cfg.budget.eps_grid = parse_list::<Dist>(key, value)?,
                "catalog" => cfg.catalog = catalog_names(value),
                "systems" => extra.extend(catalog_names(value)),
                "system_file" => cfg.system_files.push(PathBuf::from(value)),
                "theorems" => cfg.theorems = value.to_string(),
                "n" => cfg.ns = parse_list::<usize>(key, value)?,
                other => return Err(HarnessError::Config(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        cfg.catalog.extend(extra);
        cfg.budget.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if cfg.ns.is_empty() {
            return Err(HarnessError::Config("n: empty list".into()));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides() {
        let cfg = HarnessConfig::parse(
            "horizon = 32 # short\nm_max=2\ndelta_grid = 1/2, 1/4\ncatalog = rot5, shift2\nsystems = id2\nn = 2,3\n",
        )
        .unwrap();
        assert_eq!(cfg.budget.horizon, 32);
        assert_eq!(cfg.budget.m_max, 2);
        assert_eq!(cfg.budget.delta_grid, vec![Dist::new(1, 2), Dist::new(1, 4)]);
        assert_eq!(cfg.catalog, ["rot5", "shift2", "id2"]);
        assert_eq!(cfg.ns, [2, 3]);
        assert_eq!(cfg.theorems, "all");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(HarnessConfig::parse("horizon = 0").is_err());
        assert!(HarnessConfig::parse("colour = red").is_err());
        assert!(HarnessConfig::parse("delta_grid = 1/0").is_err());
        assert!(HarnessConfig::parse("just words").is_err());
        assert_eq!(HarnessConfig::parse("catalog = default").unwrap().catalog.len(), DEFAULT_CATALOG.len());
    }
}
