use crate::dynsys::{Backend, SystemSpec};
use crate::metric::MetricSpace;

use super::HarnessError;

/// Named systems run by `verify --catalog default`.
pub const DEFAULT_CATALOG: &[&str] = &[
    "rot4",
    "rot5",
    "rot6_2",
    "id2",
    "collapse3",
    "collapse4",
    "doubling729",
    "tent256",
    "gridrot233_144",
    "shift2",
    "shift3",
];

/// Side length of the cylinder basis used by the named shifts.
pub const SHIFT_CYLINDER_LEN: usize = 3;

/// Resolves a catalog name.
///
/// Accepted forms: `rot<m>` and `rot<m>_<k>` (cycle-metric rotation),
/// `id<m>`, `collapse<m>` (`i -> max(i-1, 0)`), `doubling<m>`, `tent<m>`,
/// `gridrot<m>_<k>`, `shift<s>` and `shift<s>_<L>`, and `map[a,b,...]` for an
/// explicit table on the cycle metric.
pub fn catalog_system(name: &str) -> Result<SystemSpec, HarnessError> {
    let unknown = || HarnessError::UnknownSystem(name.to_string());
    let num = |s: &str| s.parse::<usize>().map_err(|_| unknown());
    let pair = |s: &str| -> Result<(usize, Option<usize>), HarnessError> {
        match s.split_once('_') {
            Some((a, b)) => Ok((num(a)?, Some(num(b)?))),
            None => Ok((num(s)?, None)),
        }
    };
    if let Some(body) = name.strip_prefix("map[").and_then(|r| r.strip_suffix(']')) {
        let table: Vec<usize> = body.split(',').map(|t| num(t.trim())).collect::<Result<_, _>>()?;
        return Ok(cycle_map(name, table));
    }
    if let Some(rest) = name.strip_prefix("gridrot") {
        let (m, k) = pair(rest)?;
        return Ok(SystemSpec::GridRotation { m, k: k.ok_or_else(unknown)? });
    }
    if let Some(rest) = name.strip_prefix("rot") {
        let (m, k) = pair(rest)?;
        return Ok(SystemSpec::FiniteRotation { m, k: k.unwrap_or(1) });
    }
    if let Some(rest) = name.strip_prefix("id") {
        return Ok(SystemSpec::Identity { m: num(rest)? });
    }
    if let Some(rest) = name.strip_prefix("collapse") {
        let m = num(rest)?;
        if m == 0 {
            return Err(unknown());
        }
        return Ok(cycle_map(name, (0..m).map(|i| i.saturating_sub(1)).collect()));
    }
    if let Some(rest) = name.strip_prefix("doubling") {
        return Ok(SystemSpec::GridDoubling { m: num(rest)? });
    }
    if let Some(rest) = name.strip_prefix("tent") {
        return Ok(SystemSpec::GridTent { m: num(rest)? });
    }
    if let Some(rest) = name.strip_prefix("shift") {
        let (s, len) = pair(rest)?;
        let symbols = u8::try_from(s).map_err(|_| unknown())?;
        return Ok(SystemSpec::FullShift { symbols, cylinder_len: len.unwrap_or(SHIFT_CYLINDER_LEN) });
    }
    Err(unknown())
}

/// Endomap given by `table` on the cycle metric, named `name`.
pub fn cycle_map(name: &str, table: Vec<usize>) -> SystemSpec {
    SystemSpec::Custom {
        name: name.to_string(),
        backend: Backend::Finite,
        space: MetricSpace::cycle(table.len()),
        table,
        resolution: None,
    }
}

/// All `m^m` self-maps of `{0, ..., m-1}` in lexicographic order.
pub fn all_endomaps(m: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (m as u64).pow(m as u32);
    (0..total).map(move |mut code| {
        let mut table = vec![0; m];
        for slot in table.iter_mut().rev() {
            *slot = (code % m as u64) as usize;
            code /= m as u64;
        }
        table
    })
}

pub fn endomap_name(table: &[usize]) -> String {
    let parts: Vec<String> = table.iter().map(usize::to_string).collect();
    format!("map[{}]", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::build_system;

    #[test]
    fn names_resolve() {
        assert_eq!(catalog_system("rot6_2").unwrap(), SystemSpec::FiniteRotation { m: 6, k: 2 });
        assert_eq!(catalog_system("rot5").unwrap(), SystemSpec::FiniteRotation { m: 5, k: 1 });
        assert_eq!(catalog_system("gridrot233_144").unwrap(), SystemSpec::GridRotation { m: 233, k: 144 });
        assert_eq!(catalog_system("shift2_5").unwrap(), SystemSpec::FullShift { symbols: 2, cylinder_len: 5 });
        assert!(catalog_system("gridrot9").is_err());
        assert!(catalog_system("nosuch").is_err());
        for name in DEFAULT_CATALOG {
            let sys = build_system(&catalog_system(name).unwrap()).unwrap();
            assert_eq!(sys.faithful_compactum(), name.starts_with("shift"), "{name}");
        }
        let collapse = build_system(&catalog_system("collapse4").unwrap()).unwrap();
        assert_eq!(collapse.as_finite().unwrap().map.table(), &[0, 0, 1, 2]);
        assert_eq!(collapse.name(), "collapse4");
    }

    #[test]
    fn endomap_enumeration() {
        let maps: Vec<_> = all_endomaps(3).collect();
        assert_eq!(maps.len(), 27);
        assert_eq!(maps[0], [0, 0, 0]);
        assert_eq!(maps[5], [0, 1, 2]);
        assert_eq!(all_endomaps(4).count(), 256);
        let distinct: std::collections::HashSet<_> = all_endomaps(4).collect();
        assert_eq!(distinct.len(), 256);
        assert_eq!(endomap_name(&[1, 0]), "map[1,0]");
    }
}
