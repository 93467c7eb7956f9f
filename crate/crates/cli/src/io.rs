//! Readers and writers for the on-disk formats.
//!
//! Edge list: optional `#n=<count>` and `#base=<0|1>` directive lines, an
//! optional `source,target` header, then one `source,target` pair per line.
//! Nominations are treated as directed and symmetrized by logical OR.
//!
//! Response matrix: a header row of item ids followed by one row of 0/1
//! values per respondent.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use netinfluence::model::LatentConfig;
use netinfluence::simgen::GeneratedPair;
use netinfluence::{ItemResponseData, NetworkData};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedNetwork {
    pub net: NetworkData,
    /// Lines of the form `k,k`, which are skipped.
    pub self_loops: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedResponses {
    pub resp: ItemResponseData,
    pub item_ids: Vec<String>,
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes()).and_then(|_| f.flush()).map_err(|e| CliError::io(path, e))
}

pub fn load_network(path: &Path) -> CliResult<LoadedNetwork> {
    parse_network(&read_text(path)?, path)
}

fn directive<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix(key)?.trim_start();
    Some(rest.strip_prefix('=')?.trim())
}

/// Parses edge-list text; `path` is only used in error messages.
pub fn parse_network(text: &str, path: &Path) -> CliResult<LoadedNetwork> {
    let mut n: Option<usize> = None;
    let mut base: usize = 0;
    let mut raw = Vec::new();
    let mut self_loops = 0;
    let mut seen_data = false;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx as u64 + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(v) = directive(line, "n") {
                n = Some(v.parse().map_err(|_| CliError::parse(path, lineno, format!("bad node count '{v}'")))?);
            } else if let Some(v) = directive(line, "base") {
                base = match v {
                    "0" => 0,
                    "1" => 1,
                    _ => return Err(CliError::parse(path, lineno, format!("id base must be 0 or 1, got '{v}'"))),
                };
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(CliError::parse(path, lineno, format!("expected 'source,target', got '{line}'")));
        }
        let parsed = (fields[0].parse::<usize>(), fields[1].parse::<usize>());
        let (a, b) = match parsed {
            (Ok(a), Ok(b)) => (a, b),
            _ if !seen_data => {
                // column header
                seen_data = true;
                continue;
            }
            _ => return Err(CliError::parse(path, lineno, format!("non-integer id in '{line}'"))),
        };
        seen_data = true;
        if a < base || b < base {
            return Err(CliError::parse(path, lineno, format!("id below base {base}")));
        }
        let (a, b) = (a - base, b - base);
        if let Some(n) = n {
            if a >= n || b >= n {
                return Err(CliError::parse(path, lineno, format!("id out of range for n={n} (base {base})")));
            }
        }
        if a == b {
            self_loops += 1;
            continue;
        }
        raw.push((a, b));
    }

    let n = match n {
        Some(n) => n,
        None => raw.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0),
    };
    let net = NetworkData::from_edges(n, &raw)?;
    Ok(LoadedNetwork { net, self_loops })
}

/// Writes every tie once with 0-based ids and the node count declared.
pub fn write_network(net: &NetworkData, path: &Path) -> CliResult<()> {
    let mut s = format!("#n={}\n#base=0\nsource,target\n", net.n());
    for (k, l) in net.edges() {
        s.push_str(&format!("{k},{l}\n"));
    }
    write_text(path, &s)
}

pub fn load_responses(path: &Path) -> CliResult<LoadedResponses> {
    parse_responses(&read_text(path)?, path)
}

pub fn parse_responses(text: &str, path: &Path) -> CliResult<LoadedResponses> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| CliError::parse(path, 1, e.to_string()))?;
    let item_ids: Vec<String> = header.iter().map(str::to_string).collect();
    let p = item_ids.len();
    if p == 0 || item_ids.iter().all(String::is_empty) {
        return Err(CliError::parse(path, 1, "missing header of item ids"));
    }
    let mut cells = Vec::new();
    let mut n = 0;
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::parse(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != p {
            return Err(CliError::parse(path, line, format!("expected {p} values, found {}", rec.len())));
        }
        for v in rec.iter() {
            cells.push(match v {
                "0" => 0,
                "1" => 1,
                other => return Err(CliError::parse(path, line, format!("response must be 0 or 1, got '{other}'"))),
            });
        }
        n += 1;
    }
    let resp = ItemResponseData::new(n, p, cells)?;
    Ok(LoadedResponses { resp, item_ids })
}

pub fn default_item_ids(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("item{}", i + 1)).collect()
}

pub fn write_responses(resp: &ItemResponseData, item_ids: &[String], path: &Path) -> CliResult<()> {
    let mut s = item_ids.join(",");
    s.push('\n');
    for k in 0..resp.n() {
        let row: Vec<&str> = resp.row(k).iter().map(|&x| if x == 1 { "1" } else { "0" }).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    write_text(path, &s)
}

/// Column-oriented numeric table with a header row.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(create(path)?);
        let wrap = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
        w.write_record(&self.columns).map_err(wrap)?;
        for r in &self.rows {
            w.write_record(r).map_err(wrap)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

/// Shortest decimal that reads back to the same value.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Long-format latent draws: `draw,entity,dim,value`.
pub fn latent_table(draws: &[LatentConfig<f64>]) -> Table {
    let mut t = Table::new(["draw", "entity", "dim", "value"]);
    for (d, cfg) in draws.iter().enumerate() {
        for (e, p) in cfg.points().iter().enumerate() {
            for (dim, v) in p.iter().enumerate() {
                t.push(vec![d.to_string(), e.to_string(), dim.to_string(), num(*v)]);
            }
        }
    }
    t
}

/// Network, responses and generating values of a simulated dataset.
pub fn write_generated(g: &GeneratedPair, dir: &Path) -> CliResult<()> {
    write_network(&g.net, &dir.join("network.csv"))?;
    write_responses(&g.resp, &default_item_ids(g.resp.p()), &dir.join("responses.csv"))?;

    let t = &g.truth;
    let lambda = g.spec.lambda.map_or("NA".to_string(), num);
    let header = format!(
        "scenario={}\nlambda={lambda}\nseed={}\nn={}\np={}\nalpha={}\ngamma={}\ndelta={}\n",
        g.spec.scenario,
        g.spec.seed,
        g.resp.n(),
        g.resp.p(),
        num(t.alpha),
        num(t.gamma),
        num(t.delta)
    );
    write_text(&dir.join("truth.txt"), &header)?;

    let l = &t.latents;
    let mut people = Table::new(["respondent", "theta", "z0", "z1", "zi0", "zi1", "social_cluster", "item_side_cluster"]);
    for k in 0..t.theta.len() {
        let (z, zi) = (l.z_social[k], l.z_item_side[k]);
        people.push(vec![
            k.to_string(),
            num(t.theta[k]),
            num(z[0]),
            num(z[1]),
            num(zi[0]),
            num(zi[1]),
            l.social_clusters[k].to_string(),
            l.item_side_clusters[k].to_string(),
        ]);
    }
    people.write(&dir.join("truth_respondents.csv"))?;

    let mut items = Table::new(["item", "beta", "w0", "w1", "cluster"]);
    for i in 0..t.beta.len() {
        let w = l.w[i];
        items.push(vec![i.to_string(), num(t.beta[i]), num(w[0]), num(w[1]), l.item_clusters[i].to_string()]);
    }
    items.write(&dir.join("truth_items.csv"))
}
