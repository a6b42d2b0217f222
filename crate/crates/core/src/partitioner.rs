//! Popular-subject extraction and semantic-aware fragment growth.
//!
//! Fragments are seeded with the triples of the `k` highest out-degree
//! subjects. Every other subject group then joins the fragment in which its
//! subject already occurs most often as an object, so that chains of
//! subject/object links stay together. Groups that no fragment references are
//! placed in the currently smallest fragment.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::triple_io::{TriplePos, TripleStore};

/// Out-degree (number of triples) per subject, in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectFrequencyTable {
    entries: Vec<(String, usize)>,
}

impl SubjectFrequencyTable {
    /// One pass over the triples.
    pub fn from_store(store: &TripleStore) -> Self {
        let mut slot: HashMap<&str, usize> = HashMap::with_capacity(store.distinct_subjects());
        let mut entries: Vec<(String, usize)> = Vec::with_capacity(store.distinct_subjects());
        for triple in store.triples() {
            match slot.get(triple.subject.as_str()) {
                Some(&i) => entries[i].1 += 1,
                None => {
                    slot.insert(&triple.subject, entries.len());
                    entries.push((triple.subject.clone(), 1));
                }
            }
        }
        SubjectFrequencyTable { entries }
    }

    pub fn entries(&self) -> &[(String, usize)] {
        &self.entries
    }

    pub fn get(&self, subject: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|(s, _)| s == subject)
            .map(|&(_, c)| c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted by count descending, then subject ascending.
    pub fn ranked(&self) -> Vec<(&str, usize)> {
        let mut ranked: Vec<(&str, usize)> =
            self.entries.iter().map(|(s, c)| (s.as_str(), *c)).collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked
    }
}

/// The `k` subjects with the most outgoing triples.
pub fn extract_popular_subjects(store: &TripleStore, k: usize) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::ZeroFragments);
    }
    let table = SubjectFrequencyTable::from_store(store);
    if table.len() < k {
        return Err(Error::NotEnoughSubjects {
            requested: k,
            distinct: table.len(),
        });
    }
    Ok(table
        .ranked()
        .into_iter()
        .take(k)
        .map(|(s, _)| s.to_string())
        .collect())
}

/// How unseeded subject groups are attached to fragments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthMode {
    /// Repeat scoring rounds until nothing more attaches; orphans are placed
    /// one at a time and growth resumes from them.
    #[default]
    Fixpoint,
    /// Visit each remaining group once, placing it immediately.
    SinglePass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub id: usize,
    pub master: String,
    /// Sorted ascending.
    pub members: Vec<TriplePos>,
    /// Resource objects of the member triples, with multiplicity.
    pub object_frequency: HashMap<String, usize>,
}

impl Fragment {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn score(&self, subject: &str) -> usize {
        self.object_frequency.get(subject).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionResult {
    pub fragments: Vec<Fragment>,
    /// Triples placed by the smallest-fragment fallback.
    pub orphan_count: usize,
    /// Subject groups placed by the fallback.
    pub orphan_groups: usize,
}

impl PartitionResult {
    pub fn k(&self) -> usize {
        self.fragments.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.fragments.iter().map(Fragment::len).collect()
    }

    /// Fragment id per triple position.
    pub fn assignment(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for f in &self.fragments {
            for &p in &f.members {
                out[p] = Some(f.id);
            }
        }
        out
    }
}

struct Growth<'a> {
    store: &'a TripleStore,
    group_fragment: Vec<Option<usize>>,
    fragments: Vec<Fragment>,
    dirty: BTreeSet<usize>,
}

impl<'a> Growth<'a> {
    fn assign(&mut self, group: usize, fragment: usize) {
        self.group_fragment[group] = Some(fragment);
        let (_, positions) = self
            .store
            .subject_index()
            .get_index(group)
            .expect("group ordinal in range");
        let frag = &mut self.fragments[fragment];
        for &pos in positions {
            frag.members.push(pos);
            let Some(object) = self.store.triples()[pos].resource_object() else {
                continue;
            };
            *frag.object_frequency.entry(object.to_string()).or_insert(0) += 1;
            if let Some(g) = self.store.subject_index().get_index_of(object) {
                if self.group_fragment[g].is_none() {
                    self.dirty.insert(g);
                }
            }
        }
    }

    /// Highest score, lowest fragment id on ties; `None` when every score is 0.
    fn best_fragment(&self, group: usize) -> Option<usize> {
        let (subject, _) = self.store.subject_index().get_index(group)?;
        let mut best: Option<(usize, usize)> = None;
        for frag in &self.fragments {
            let score = frag.score(subject);
            if score > 0 && best.is_none_or(|(_, s)| score > s) {
                best = Some((frag.id, score));
            }
        }
        best.map(|(id, _)| id)
    }

    fn smallest_fragment(&self) -> usize {
        self.fragments
            .iter()
            .min_by_key(|f| (f.members.len(), f.id))
            .map(|f| f.id)
            .expect("at least one fragment")
    }
}

/// Seeds one fragment per master subject and grows them over the remaining
/// subject groups.
pub fn grow_fragments(
    store: &TripleStore,
    masters: &[String],
    mode: GrowthMode,
) -> Result<PartitionResult> {
    if masters.is_empty() {
        return Err(Error::ZeroFragments);
    }
    let groups = store.subject_index();
    let mut growth = Growth {
        store,
        group_fragment: vec![None; groups.len()],
        fragments: masters
            .iter()
            .enumerate()
            .map(|(id, m)| Fragment {
                id,
                master: m.clone(),
                members: Vec::new(),
                object_frequency: HashMap::new(),
            })
            .collect(),
        dirty: BTreeSet::new(),
    };

    for (id, master) in masters.iter().enumerate() {
        let group = groups
            .get_index_of(master.as_str())
            .filter(|&g| growth.group_fragment[g].is_none())
            .ok_or_else(|| Error::InvalidMaster(master.clone()))?;
        growth.assign(group, id);
    }

    let mut orphan_count = 0;
    let mut orphan_groups = 0;
    let mut place_orphan = |growth: &mut Growth<'_>, group: usize| {
        let target = growth.smallest_fragment();
        orphan_count += groups[group].len();
        orphan_groups += 1;
        growth.assign(group, target);
    };

    match mode {
        GrowthMode::SinglePass => {
            growth.dirty.clear();
            for group in 0..groups.len() {
                if growth.group_fragment[group].is_some() {
                    continue;
                }
                match growth.best_fragment(group) {
                    Some(f) => growth.assign(group, f),
                    None => place_orphan(&mut growth, group),
                }
            }
        }
        GrowthMode::Fixpoint => {
            // Only groups whose score rose since they were last looked at can
            // attach, so a round visits the dirty set in group order.
            let mut next_orphan = 0;
            loop {
                while !growth.dirty.is_empty() {
                    let mut cursor = 0;
                    while let Some(&group) = growth.dirty.range(cursor..).next() {
                        growth.dirty.remove(&group);
                        cursor = group + 1;
                        if growth.group_fragment[group].is_some() {
                            continue;
                        }
                        if let Some(f) = growth.best_fragment(group) {
                            growth.assign(group, f);
                        }
                    }
                }
                while next_orphan < groups.len() && growth.group_fragment[next_orphan].is_some() {
                    next_orphan += 1;
                }
                if next_orphan == groups.len() {
                    break;
                }
                place_orphan(&mut growth, next_orphan);
            }
        }
    }

    let mut fragments = growth.fragments;
    for f in &mut fragments {
        f.members.sort_unstable();
    }
    Ok(PartitionResult {
        fragments,
        orphan_count,
        orphan_groups,
    })
}
