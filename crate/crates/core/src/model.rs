//! Instances, preference profiles and allocations, plus their JSON forms.
//!
//! Agents and houses are dense indices internally (`0..n`, `0..m`). The JSON
//! files name them `i1..in` and `h1..hm`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

pub type Agent = usize;
pub type House = usize;

pub fn agent_name(i: Agent) -> String {
    format!("i{}", i + 1)
}

pub fn house_name(h: House) -> String {
    format!("h{}", h + 1)
}

fn parse_index(name: &str, prefix: char, bound: usize, what: &str) -> Result<usize> {
    let digits = name
        .strip_prefix(prefix)
        .ok_or_else(|| Error::Validation(format!("{what} name {name:?} must start with '{prefix}'")))?;
    let k: usize = digits
        .parse()
        .map_err(|_| Error::Validation(format!("bad {what} name {name:?}")))?;
    if k == 0 || k > bound {
        return Err(Error::Validation(format!(
            "{what} {name:?} out of range 1..={bound}"
        )));
    }
    Ok(k - 1)
}

pub fn parse_house(name: &str, m: usize) -> Result<House> {
    parse_index(name, 'h', m, "house")
}

pub fn parse_agent(name: &str, n: usize) -> Result<Agent> {
    parse_index(name, 'i', n, "agent")
}

/// One agent's (possibly partial, possibly weak) ranking.
///
/// `groups[0]` is the most preferred tie-group. Houses outside every group are
/// unranked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    groups: Vec<Vec<House>>,
    tier: Vec<Option<u32>>,
}

impl Ranking {
    pub fn new(groups: Vec<Vec<House>>, m: usize) -> Result<Self> {
        let mut tier = vec![None; m];
        for (t, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::Validation("empty tie-group in ranking".into()));
            }
            for &h in group {
                if h >= m {
                    return Err(Error::Validation(format!("house index {h} out of range")));
                }
                if tier[h].is_some() {
                    return Err(Error::Validation(format!(
                        "house {} ranked twice",
                        house_name(h)
                    )));
                }
                tier[h] = Some(t as u32);
            }
        }
        Ok(Ranking { groups, tier })
    }

    /// A strict ranking from best to worst.
    pub fn strict(order: &[House], m: usize) -> Result<Self> {
        Self::new(order.iter().map(|&h| vec![h]).collect(), m)
    }

    pub fn groups(&self) -> &[Vec<House>] {
        &self.groups
    }

    /// Index of the tie-group holding `h`, or `None` when unranked.
    pub fn tier(&self, h: House) -> Option<u32> {
        self.tier[h]
    }

    pub fn ranked_len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preferences {
    Ordinal(Vec<Ranking>),
    /// `values[i][h]`.
    Cardinal(Vec<Vec<u32>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    m: usize,
    prefs: Preferences,
    axis: Option<Vec<House>>,
}

impl Instance {
    /// Builds and validates an instance. Requires `m >= n >= 1`; `m == n` is accepted.
    pub fn new(n: usize, m: usize, prefs: Preferences, axis: Option<Vec<House>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("instance needs at least one agent".into()));
        }
        if m < n {
            return Err(Error::Validation(format!(
                "need at least as many houses as agents (n={n}, m={m})"
            )));
        }
        match &prefs {
            Preferences::Ordinal(rankings) => {
                if rankings.len() != n {
                    return Err(Error::Validation(format!(
                        "expected {n} rankings, found {}",
                        rankings.len()
                    )));
                }
                if rankings.iter().any(|r| r.tier.len() != m) {
                    return Err(Error::Validation("ranking built for a different house count".into()));
                }
            }
            Preferences::Cardinal(values) => {
                if values.len() != n || values.iter().any(|row| row.len() != m) {
                    return Err(Error::Validation(format!("value matrix must be {n}x{m}")));
                }
            }
        }
        if let Some(axis) = &axis {
            check_permutation(axis, m)?;
        }
        Ok(Instance { n, m, prefs, axis })
    }

    pub fn ordinal(rankings: Vec<Vec<Vec<House>>>, m: usize) -> Result<Self> {
        let n = rankings.len();
        let rankings = rankings
            .into_iter()
            .map(|groups| Ranking::new(groups, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, m, Preferences::Ordinal(rankings), None)
    }

    pub fn cardinal(values: Vec<Vec<u32>>) -> Result<Self> {
        let n = values.len();
        let m = values.first().map_or(0, Vec::len);
        Self::new(n, m, Preferences::Cardinal(values), None)
    }

    pub fn with_axis(mut self, axis: Vec<House>) -> Result<Self> {
        check_permutation(&axis, self.m)?;
        self.axis = Some(axis);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn prefs(&self) -> &Preferences {
        &self.prefs
    }

    pub fn axis(&self) -> Option<&[House]> {
        self.axis.as_deref()
    }

    pub fn is_cardinal(&self) -> bool {
        matches!(self.prefs, Preferences::Cardinal(_))
    }

    /// Whether `(i, h)` is an edge of the preference graph.
    pub fn lists(&self, i: Agent, h: House) -> bool {
        match &self.prefs {
            Preferences::Ordinal(r) => r[i].tier(h).is_some(),
            Preferences::Cardinal(v) => v[i][h] > 0,
        }
    }

    /// Strict preference of agent `i` for `a` over `b`.
    ///
    /// For partial rankings a ranked house beats an unranked one and two unranked
    /// houses are incomparable.
    pub fn prefers(&self, i: Agent, a: House, b: House) -> bool {
        match &self.prefs {
            Preferences::Ordinal(r) => match (r[i].tier(a), r[i].tier(b)) {
                (Some(ta), Some(tb)) => ta < tb,
                (Some(_), None) => true,
                _ => false,
            },
            Preferences::Cardinal(v) => v[i][a] > v[i][b],
        }
    }

    /// Envy of agent `i`, holding `own`, towards the holder of `other`.
    pub fn envy_amount(&self, i: Agent, own: House, other: House) -> u64 {
        match &self.prefs {
            Preferences::Ordinal(_) => u64::from(self.prefers(i, other, own)),
            Preferences::Cardinal(v) => u64::from(v[i][other].saturating_sub(v[i][own])),
        }
    }

    pub fn value(&self, i: Agent, h: House) -> Result<u32> {
        match &self.prefs {
            Preferences::Cardinal(v) => Ok(v[i][h]),
            Preferences::Ordinal(_) => Err(Error::Unsupported(
                "utility values need a cardinal profile".into(),
            )),
        }
    }

    /// Every agent ranks (or positively values) every house.
    pub fn is_complete(&self) -> bool {
        match &self.prefs {
            Preferences::Ordinal(r) => r.iter().all(|r| r.ranked_len() == self.m),
            Preferences::Cardinal(v) => v.iter().all(|row| row.iter().all(|&x| x > 0)),
        }
    }

    /// No agent is indifferent between two houses it ranks.
    pub fn is_strict(&self) -> bool {
        match &self.prefs {
            Preferences::Ordinal(r) => r.iter().all(|r| r.groups.iter().all(|g| g.len() == 1)),
            Preferences::Cardinal(v) => v.iter().all(|row| {
                let mut sorted = row.clone();
                sorted.sort_unstable();
                sorted.windows(2).all(|w| w[0] != w[1])
            }),
        }
    }

    /// The ordinal profile induced by cardinal values: all houses ranked,
    /// equal values tied.
    pub fn to_ordinal(&self) -> Instance {
        let prefs = match &self.prefs {
            Preferences::Ordinal(_) => self.prefs.clone(),
            Preferences::Cardinal(values) => Preferences::Ordinal(
                values
                    .iter()
                    .map(|row| {
                        let mut houses: Vec<House> = (0..self.m).collect();
                        houses.sort_by(|&a, &b| row[b].cmp(&row[a]).then(a.cmp(&b)));
                        let mut groups: Vec<Vec<House>> = Vec::new();
                        for h in houses {
                            match groups.last_mut() {
                                Some(g) if row[g[0]] == row[h] => g.push(h),
                                _ => groups.push(vec![h]),
                            }
                        }
                        Ranking::new(groups, self.m).expect("groups built from a permutation")
                    })
                    .collect(),
            ),
        };
        Instance {
            n: self.n,
            m: self.m,
            prefs,
            axis: self.axis.clone(),
        }
    }
}

fn check_permutation(axis: &[House], m: usize) -> Result<()> {
    if axis.len() != m {
        return Err(Error::Validation(format!(
            "axis has {} houses, instance has {m}",
            axis.len()
        )));
    }
    let mut seen = vec![false; m];
    for &h in axis {
        if h >= m || std::mem::replace(&mut seen[h], true) {
            return Err(Error::Validation("axis is not a permutation of the houses".into()));
        }
    }
    Ok(())
}

/// A complete, injective assignment of houses to agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    houses: Vec<House>,
}

impl Allocation {
    pub fn new(houses: Vec<House>, m: usize) -> Result<Self> {
        let mut taken = vec![false; m];
        for (i, &h) in houses.iter().enumerate() {
            if h >= m {
                return Err(Error::Validation(format!(
                    "agent {} assigned unknown house index {h}",
                    agent_name(i)
                )));
            }
            if std::mem::replace(&mut taken[h], true) {
                return Err(Error::Validation(format!(
                    "house {} assigned twice",
                    house_name(h)
                )));
            }
        }
        Ok(Allocation { houses })
    }

    /// Checks the allocation is complete for `inst`.
    pub fn for_instance(houses: Vec<House>, inst: &Instance) -> Result<Self> {
        if houses.len() != inst.n() {
            return Err(Error::Validation(format!(
                "allocation covers {} agents, instance has {}",
                houses.len(),
                inst.n()
            )));
        }
        Self::new(houses, inst.m())
    }

    pub(crate) fn from_vec_unchecked(houses: Vec<House>) -> Self {
        Allocation { houses }
    }

    pub fn house(&self, i: Agent) -> House {
        self.houses[i]
    }

    pub fn houses(&self) -> &[House] {
        &self.houses
    }

    pub fn n(&self) -> usize {
        self.houses.len()
    }

    /// `holder[h]` for every house.
    pub fn holders(&self, m: usize) -> Vec<Option<Agent>> {
        let mut holder = vec![None; m];
        for (i, &h) in self.houses.iter().enumerate() {
            holder[h] = Some(i);
        }
        holder
    }

    /// Agents whose house differs between `self` and `other`.
    pub fn moved_agents(&self, other: &Allocation) -> Vec<Agent> {
        self.houses
            .iter()
            .zip(&other.houses)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect()
    }

    /// `|{i : self(i) != other(i)}|`, the number of reallocated agents.
    pub fn distance(&self, other: &Allocation) -> usize {
        self.houses
            .iter()
            .zip(&other.houses)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn validate_against(&self, inst: &Instance) -> Result<()> {
        Allocation::for_instance(self.houses.clone(), inst).map(|_| ())
    }

    pub(crate) fn set(&mut self, i: Agent, h: House) {
        self.houses[i] = h;
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .houses
            .iter()
            .enumerate()
            .map(|(i, &h)| format!("{}->{}", agent_name(i), house_name(h)))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum PrefsFile {
    Ordinal { rankings: Vec<Vec<Vec<String>>> },
    Cardinal { values: Vec<Vec<u32>> },
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    m: usize,
    prefs: PrefsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axis: Option<Vec<String>>,
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let m = file.m;
        let prefs = match file.prefs {
            PrefsFile::Ordinal { rankings } => Preferences::Ordinal(
                rankings
                    .into_iter()
                    .map(|groups| {
                        let groups = groups
                            .iter()
                            .map(|g| g.iter().map(|h| parse_house(h, m)).collect())
                            .collect::<Result<Vec<Vec<House>>>>()?;
                        Ranking::new(groups, m)
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            PrefsFile::Cardinal { values } => Preferences::Cardinal(values),
        };
        let axis = file
            .axis
            .map(|names| names.iter().map(|h| parse_house(h, m)).collect::<Result<Vec<_>>>())
            .transpose()?;
        Instance::new(file.n, m, prefs, axis)
    }

    pub fn to_json(&self) -> String {
        let prefs = match &self.prefs {
            Preferences::Ordinal(rankings) => PrefsFile::Ordinal {
                rankings: rankings
                    .iter()
                    .map(|r| {
                        r.groups
                            .iter()
                            .map(|g| g.iter().map(|&h| house_name(h)).collect())
                            .collect()
                    })
                    .collect(),
            },
            Preferences::Cardinal(values) => PrefsFile::Cardinal {
                values: values.clone(),
            },
        };
        let file = InstanceFile {
            n: self.n,
            m: self.m,
            prefs,
            axis: self
                .axis
                .as_ref()
                .map(|a| a.iter().map(|&h| house_name(h)).collect()),
        };
        serde_json::to_string(&file).expect("instance serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Allocation {
    pub fn from_json(text: &str, inst: &Instance) -> Result<Self> {
        let map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(text)?;
        let mut houses = vec![None; inst.n()];
        for (agent, house) in &map {
            let i = parse_agent(agent, inst.n())?;
            let h = house
                .as_str()
                .ok_or_else(|| Error::Validation(format!("house for {agent} must be a string")))?;
            if houses[i].replace(parse_house(h, inst.m())?).is_some() {
                return Err(Error::Validation(format!("agent {agent} listed twice")));
            }
        }
        let houses = houses
            .into_iter()
            .enumerate()
            .map(|(i, h)| {
                h.ok_or_else(|| {
                    Error::Validation(format!("allocation misses agent {}", agent_name(i)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Allocation::for_instance(houses, inst)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .houses
            .iter()
            .enumerate()
            .map(|(i, &h)| (agent_name(i), serde_json::Value::String(house_name(h))))
            .collect();
        serde_json::Value::Object(map)
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn load(path: impl AsRef<Path>, inst: &Instance) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_fewer_houses_than_agents() {
        let err = Instance::cardinal(vec![vec![1], vec![2]]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn accepts_square_instances() {
        let inst = Instance::cardinal(vec![vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!((inst.n(), inst.m()), (2, 2));
    }

    #[test]
    fn rejects_duplicate_house_in_ranking() {
        assert!(Ranking::new(vec![vec![0], vec![0]], 2).is_err());
        assert!(Ranking::new(vec![vec![]], 2).is_err());
    }

    #[test]
    fn rejects_bad_axis() {
        let inst = Instance::cardinal(vec![vec![1, 2, 3]]).unwrap();
        assert!(inst.clone().with_axis(vec![0, 1]).is_err());
        assert!(inst.clone().with_axis(vec![0, 1, 1]).is_err());
        assert!(inst.with_axis(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn allocation_must_be_injective_and_complete() {
        let inst = Instance::cardinal(vec![vec![1, 2, 3], vec![3, 2, 1]]).unwrap();
        assert!(Allocation::for_instance(vec![0, 0], &inst).is_err());
        assert!(Allocation::for_instance(vec![0], &inst).is_err());
        assert!(Allocation::for_instance(vec![0, 3], &inst).is_err());
        assert!(Allocation::for_instance(vec![2, 0], &inst).is_ok());
    }

    #[test]
    fn partial_ranking_semantics() {
        // i1 ranks h1 > h2, leaves h3 unranked.
        let inst = Instance::ordinal(vec![vec![vec![0], vec![1]]], 3).unwrap();
        assert!(inst.prefers(0, 0, 1));
        assert!(inst.prefers(0, 1, 2));
        assert!(!inst.prefers(0, 2, 1));
        assert_eq!(inst.envy_amount(0, 2, 1), 1);
        assert!(!inst.prefers(0, 2, 2));
        assert!(!inst.is_complete());
        assert!(inst.is_strict());
    }

    #[test]
    fn strictness_and_completeness_predicates() {
        let tied = Instance::ordinal(vec![vec![vec![0, 1]]], 2).unwrap();
        assert!(tied.is_complete());
        assert!(!tied.is_strict());
        let card = Instance::cardinal(vec![vec![3, 0, 2]]).unwrap();
        assert!(!card.is_complete());
        assert!(card.is_strict());
    }

    #[test]
    fn json_roundtrip_keeps_instance() {
        let text = r#"{"n":2,"m":3,"prefs":{"kind":"ordinal","rankings":[[["h3","h2"],["h1"]],[["h1"]]]},"axis":["h2","h1","h3"]}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.axis(), Some(&[1, 0, 2][..]));
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn json_rejects_unknown_house() {
        let text = r#"{"n":1,"m":1,"prefs":{"kind":"ordinal","rankings":[[["h2"]]]}}"#;
        assert!(Instance::from_json(text).is_err());
    }

    #[test]
    fn allocation_json_keeps_agent_order() {
        let inst = Instance::cardinal(vec![vec![1; 11]; 10]).unwrap();
        let a = Allocation::for_instance((0..10).rev().collect(), &inst).unwrap();
        let text = a.to_json();
        assert!(text.starts_with(r#"{"i1":"h10","i2":"h9""#));
        assert_eq!(Allocation::from_json(&text, &inst).unwrap(), a);
    }

    #[test]
    fn allocation_json_rejects_missing_agent() {
        let inst = Instance::cardinal(vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert!(Allocation::from_json(r#"{"i1":"h1"}"#, &inst).is_err());
        assert!(Allocation::from_json(r#"{"i1":"h1","i2":"h1"}"#, &inst).is_err());
    }
}
