//! Excitation manifolds `{Ĝ_I}` over a closed-shell reference determinant in
//! which spin orbitals `0..n_occ` are occupied.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::operator_algebra::ExcitationIndex;

#[derive(Debug, Error, PartialEq)]
pub enum ManifoldError {
    #[error("invalid manifold dimensions: {0}")]
    Domain(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Sector {
    EE,
    IP,
    EA,
}

impl Sector {
    pub const ALL: [Sector; 3] = [Sector::EE, Sector::IP, Sector::EA];

    /// Change in electron number of the target states.
    pub fn particle_change(self) -> i32 {
        match self {
            Sector::EE => 0,
            Sector::IP => -1,
            Sector::EA => 1,
        }
    }

    /// Default twice-Sz filters: one run for EE, both spin channels for IP/EA.
    pub fn default_sz_filters(self) -> Vec<i32> {
        match self {
            Sector::EE => vec![0],
            Sector::IP => vec![-1, 1],
            Sector::EA => vec![1, -1],
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::EE => "EE",
            Sector::IP => "IP",
            Sector::EA => "EA",
        })
    }
}

impl std::str::FromStr for Sector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "EE" => Ok(Sector::EE),
            "IP" => Ok(Sector::IP),
            "EA" => Ok(Sector::EA),
            _ => Err(format!("unknown sector {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifold {
    pub sector: Sector,
    pub entries: Vec<ExcitationIndex>,
    pub n_occ: usize,
    pub n_virt: usize,
    pub sz_filter: Option<i32>,
}

impl Manifold {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_so(&self) -> usize {
        self.n_occ + self.n_virt
    }

    /// Reference determinant mask with the lowest `n_occ` spin orbitals filled.
    pub fn reference_mask(&self) -> u64 {
        (1u64 << self.n_occ) - 1
    }

    /// One line per entry: `sector kind indices`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let idx: Vec<String> = e.indices().iter().map(|k| k.to_string()).collect();
            let _ = writeln!(out, "{} {} {}", self.sector, e.kind(), idx.join(" "));
        }
        out
    }
}

/// Enumerates singles then doubles, each block in lexicographic index order.
///
/// `sz_filter` keeps only entries whose change in twice-Sz equals the value.
pub fn enumerate_manifold(
    sector: Sector,
    n_occ: usize,
    n_virt: usize,
    sz_filter: Option<i32>,
) -> Result<Manifold, ManifoldError> {
    if n_occ == 0 {
        return Err(ManifoldError::Domain("n_occ must be at least 1".into()));
    }
    if n_occ + n_virt > 64 {
        return Err(ManifoldError::Domain(format!("{} spin orbitals exceed 64", n_occ + n_virt)));
    }
    let occ = 0..n_occ;
    let virt = n_occ..n_occ + n_virt;
    let mut singles = Vec::new();
    let mut doubles = Vec::new();
    match sector {
        Sector::EE => {
            for i in occ.clone() {
                for a in virt.clone() {
                    singles.push(ExcitationIndex::Ee1 { i, a });
                }
            }
            for i in occ.clone() {
                for j in i + 1..n_occ {
                    for a in virt.clone() {
                        for b in a + 1..virt.end {
                            doubles.push(ExcitationIndex::Ee2 { i, j, a, b });
                        }
                    }
                }
            }
        }
        Sector::IP => {
            for i in occ.clone() {
                singles.push(ExcitationIndex::Ip1 { i });
            }
            for i in occ.clone() {
                for j in i + 1..n_occ {
                    for a in virt.clone() {
                        doubles.push(ExcitationIndex::Ip2 { i, j, a });
                    }
                }
            }
        }
        Sector::EA => {
            for a in virt.clone() {
                singles.push(ExcitationIndex::Ea1 { a });
            }
            for i in occ.clone() {
                for a in virt.clone() {
                    for b in a + 1..virt.end {
                        doubles.push(ExcitationIndex::Ea2 { i, a, b });
                    }
                }
            }
        }
    }
    let entries = singles
        .into_iter()
        .chain(doubles)
        .filter(|e| sz_filter.is_none_or(|s| e.sz2_change() == s))
        .collect();
    Ok(Manifold { sector, entries, n_occ, n_virt, sz_filter })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_for_two_occupied_two_virtual() {
        assert_eq!(enumerate_manifold(Sector::EE, 2, 2, None).unwrap().len(), 5);
        assert_eq!(enumerate_manifold(Sector::IP, 2, 2, None).unwrap().len(), 4);
        assert_eq!(enumerate_manifold(Sector::EA, 2, 2, None).unwrap().len(), 4);
    }

    #[test]
    fn spin_filter_drops_cross_spin_singles() {
        let m = enumerate_manifold(Sector::EE, 2, 2, Some(0)).unwrap();
        let singles: Vec<_> = m.entries.iter().filter(|e| e.is_single()).collect();
        assert_eq!(singles, vec![&ExcitationIndex::Ee1 { i: 0, a: 2 }, &ExcitationIndex::Ee1 { i: 1, a: 3 }]);
        assert!(m.entries.contains(&ExcitationIndex::Ee2 { i: 0, j: 1, a: 2, b: 3 }));
    }

    #[test]
    fn zero_occupied_is_rejected() {
        assert!(enumerate_manifold(Sector::EE, 0, 4, None).is_err());
    }

    #[test]
    fn singles_precede_doubles() {
        let m = enumerate_manifold(Sector::IP, 4, 4, None).unwrap();
        let first_double = m.entries.iter().position(|e| !e.is_single()).unwrap();
        assert!(m.entries[first_double..].iter().all(|e| !e.is_single()));
        let mut sorted = m.entries[first_double..].to_vec();
        sorted.sort();
        assert_eq!(sorted, m.entries[first_double..]);
    }

    #[test]
    fn dump_lists_each_entry() {
        let m = enumerate_manifold(Sector::EA, 2, 2, Some(1)).unwrap();
        assert_eq!(m.dump(), "EA EA1 2\nEA EA2 1 2 3\n");
    }
}
