use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_distributed, Cluster, QueryKind, QueryPattern, QueryResult};
use crate::error::{Error, Result};

/// Which node coordinates each query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomePolicy {
    /// Route to the node that touches the fewest others (ties: answered
    /// locally first, then lowest id).
    #[default]
    BestCase,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryReport {
    pub index: usize,
    pub kind: QueryKind,
    pub home: usize,
    pub rows: usize,
    pub nodes_touched: usize,
    pub locally_answered: bool,
    pub joins: usize,
    pub triples_scanned: usize,
    pub qet_proxy: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncSummary {
    pub fraction_local: f64,
    pub mean_nodes_touched: f64,
    pub mean_joins: f64,
    pub mean_triples_scanned: f64,
    pub mean_qet_proxy: f64,
    pub queries: Vec<QueryReport>,
}

fn route(cluster: &Cluster<'_>, q: &QueryPattern, policy: HomePolicy) -> Result<(usize, QueryResult)> {
    match policy {
        HomePolicy::Fixed(home) => Ok((home, evaluate_distributed(cluster, q, home)?)),
        HomePolicy::BestCase => {
            let mut best: Option<(usize, QueryResult)> = None;
            for home in 0..cluster.m() {
                let r = evaluate_distributed(cluster, q, home)?;
                let better = best.as_ref().is_none_or(|(_, b)| {
                    (r.metrics.nodes_touched, !r.metrics.locally_answered)
                        < (b.metrics.nodes_touched, !b.metrics.locally_answered)
                });
                if better {
                    best = Some((home, r));
                }
            }
            Ok(best.expect("cluster has at least one node"))
        }
    }
}

/// Evaluates every query (in parallel) and aggregates locality metrics.
pub fn inc_report(cluster: &Cluster<'_>, workload: &[QueryPattern], policy: HomePolicy) -> Result<IncSummary> {
    if workload.is_empty() {
        return Err(Error::InvalidQuery("workload is empty".into()));
    }
    let queries = workload
        .par_iter()
        .enumerate()
        .map(|(index, q)| {
            let (home, r) = route(cluster, q, policy)?;
            Ok(QueryReport {
                index,
                kind: q.kind,
                home,
                rows: r.bindings.len(),
                nodes_touched: r.metrics.nodes_touched,
                locally_answered: r.metrics.locally_answered,
                joins: r.metrics.joins,
                triples_scanned: r.metrics.triples_scanned,
                qet_proxy: r.metrics.qet_proxy(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = queries.len() as f64;
    let mean = |f: fn(&QueryReport) -> usize| queries.iter().map(f).sum::<usize>() as f64 / n;
    Ok(IncSummary {
        fraction_local: queries.iter().filter(|q| q.locally_answered).count() as f64 / n,
        mean_nodes_touched: mean(|q| q.nodes_touched),
        mean_joins: mean(|q| q.joins),
        mean_triples_scanned: mean(|q| q.triples_scanned),
        mean_qet_proxy: mean(|q| q.qet_proxy),
        queries,
    })
}

impl IncSummary {
    /// Summary of a workload with no queries.
    pub fn empty() -> Self {
        IncSummary {
            fraction_local: 0.0,
            mean_nodes_touched: 0.0,
            mean_joins: 0.0,
            mean_triples_scanned: 0.0,
            mean_qet_proxy: 0.0,
            queries: Vec::new(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "query",
            "type",
            "home",
            "rows",
            "nodes_touched",
            "locally_answered",
            "joins",
            "triples_scanned",
            "qet_proxy",
        ])?;
        for q in &self.queries {
            w.write_record([
                q.index.to_string(),
                q.kind.to_string(),
                q.home.to_string(),
                q.rows.to_string(),
                q.nodes_touched.to_string(),
                q.locally_answered.to_string(),
                q.joins.to_string(),
                q.triples_scanned.to_string(),
                q.qet_proxy.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<inc report>", e))?;
        Ok(())
    }
}

impl fmt::Display for IncSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>3}  {:<9}  {:>4}  {:>7}  {:>5}  {:>5}  {:>5}  {:>9}",
            "#", "type", "home", "rows", "nodes", "local", "joins", "scanned"
        )?;
        for q in &self.queries {
            writeln!(
                f,
                "{:>3}  {:<9}  {:>4}  {:>7}  {:>5}  {:>5}  {:>5}  {:>9}",
                q.index,
                q.kind.to_string(),
                q.home,
                q.rows,
                q.nodes_touched,
                if q.locally_answered { "yes" } else { "no" },
                q.joins,
                q.triples_scanned
            )?;
        }
        write!(
            f,
            "answered locally: {:.1}%  mean nodes touched: {:.2}  mean joins: {:.2}  mean scanned: {:.1}",
            self.fraction_local * 100.0,
            self.mean_nodes_touched,
            self.mean_joins,
            self.mean_triples_scanned
        )
    }
}
