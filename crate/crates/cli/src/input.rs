//! Input spec files: groups, functions, systems, kernels, couplings and sample batches.

use cubic_core::abelian::FiniteAbelianGroup;
use cubic_core::coupling::{Coupling, Label};
use cubic_core::cube::Vertex;
use cubic_core::exchange::{KernelMap, SampleBatch};
use cubic_core::host_kra::FilteredAction;
use cubic_core::measure::{FiniteProbSpace, FunctionOnSpace, Partition};
use cubic_core::scalar::{parse_q, Scalar, Q};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// An input problem, reported with the file and field that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<cubic_core::Error> for InputError {
    fn from(e: cubic_core::Error) -> Self {
        InputError(e.to_string())
    }
}

pub type InputResult<T> = Result<T, InputError>;

fn field_err(path: &Path, field: &str, msg: impl fmt::Display) -> InputError {
    InputError(format!("{}: {}: {}", path.display(), field, msg))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> InputResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {}", path.display(), e)))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {}", path.display(), e)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub cyclic_orders: Vec<u32>,
}

impl GroupSpec {
    fn build(&self, path: &Path, field: &str) -> InputResult<FiniteAbelianGroup> {
        FiniteAbelianGroup::new(self.cyclic_orders.clone()).map_err(|e| field_err(path, &format!("{}cyclic_orders", field), e))
    }
}

/// `--group 5`, `--group 2,2` or a path to a group spec file.
pub fn parse_group(arg: &str) -> InputResult<FiniteAbelianGroup> {
    let path = Path::new(arg);
    if path.is_file() {
        let spec: GroupSpec = read_json(path)?;
        return spec.build(path, "");
    }
    let orders = arg
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|_| InputError(format!("--group: `{}` is not a cyclic order or a file", arg))))
        .collect::<InputResult<Vec<_>>>()?;
    FiniteAbelianGroup::new(orders).map_err(|e| InputError(format!("--group: {}", e)))
}

fn parse_rational(v: &Value) -> Option<Q> {
    match v {
        Value::String(s) => parse_q(s),
        Value::Number(n) => parse_q(&n.to_string()),
        _ => None,
    }
}

fn scalar_entry<S: Scalar>(path: &Path, field: &str, v: &Value) -> InputResult<S> {
    let bad = || field_err(path, field, "expected \"p/q\" or [re, im]");
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            let re = parse_rational(&parts[0]).ok_or_else(bad)?;
            let im = parse_rational(&parts[1]).ok_or_else(bad)?;
            Ok(S::from_parts(&re, &im))
        }
        _ => parse_rational(v).map(|r| S::from_q(&r)).ok_or_else(bad),
    }
}

fn rational_entry(path: &Path, field: &str, v: &Value) -> InputResult<Q> {
    parse_rational(v).ok_or_else(|| field_err(path, field, "expected a rational \"p/q\""))
}

fn weights_entry(path: &Path, field: &str, vs: &[Value]) -> InputResult<FiniteProbSpace> {
    let ws = vs.iter().enumerate().map(|(i, v)| rational_entry(path, &format!("{}[{}]", field, i), v)).collect::<InputResult<Vec<_>>>()?;
    FiniteProbSpace::new(ws).map_err(|e| field_err(path, field, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionSpec {
    values: Vec<Value>,
}

fn build_function<S: Scalar>(spec: &FunctionSpec, path: &Path, field: &str, size: usize) -> InputResult<FunctionOnSpace<S>> {
    if spec.values.len() != size {
        return Err(field_err(path, &format!("{}values", field), format!("{} entries for a space of {} atoms", spec.values.len(), size)));
    }
    let vals = spec
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| scalar_entry(path, &format!("{}values[{}]", field, i), v))
        .collect::<InputResult<Vec<S>>>()?;
    Ok(FunctionOnSpace::new(vals))
}

/// A function spec `{values}` on a space of `size` atoms.
pub fn read_function<S: Scalar>(path: &Path, size: usize) -> InputResult<FunctionOnSpace<S>> {
    build_function(&read_json::<FunctionSpec>(path)?, path, "", size)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionListSpec {
    functions: Vec<FunctionSpec>,
}

/// `{functions: [{values}, ...]}`.
pub fn read_functions<S: Scalar>(path: &Path, size: usize) -> InputResult<Vec<FunctionOnSpace<S>>> {
    let spec: FunctionListSpec = read_json(path)?;
    spec.functions.iter().enumerate().map(|(i, f)| build_function(f, path, &format!("functions[{}].", i), size)).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceEntry {
    group: GroupSpec,
    values: Vec<Value>,
}

/// `{sequence: [{group, values}, ...]}` for convergence checks.
pub fn read_sequence<S: Scalar>(path: &Path) -> InputResult<Vec<(FiniteAbelianGroup, FunctionOnSpace<S>)>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Seq {
        sequence: Vec<SequenceEntry>,
    }
    let spec: Seq = read_json(path)?;
    spec.sequence
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let g = e.group.build(path, &format!("sequence[{}].group.", i))?;
            let f = build_function(&FunctionSpec { values: e.values.clone() }, path, &format!("sequence[{}].", i), g.order() as usize)?;
            Ok((g, f))
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelSpec {
    generators: Vec<Vec<u32>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSpec {
    atoms: usize,
    weights: Vec<Value>,
    levels: Vec<LevelSpec>,
}

/// A system spec `{atoms, weights, levels: [{generators}]}`.
pub fn read_system(path: &Path) -> InputResult<FilteredAction> {
    let spec: SystemSpec = read_json(path)?;
    if spec.weights.len() != spec.atoms {
        return Err(field_err(path, "weights", format!("{} weights for {} atoms", spec.weights.len(), spec.atoms)));
    }
    let space = weights_entry(path, "weights", &spec.weights)?;
    for (j, level) in spec.levels.iter().enumerate() {
        for (i, g) in level.generators.iter().enumerate() {
            let field = format!("levels[{}].generators[{}]", j, i);
            if g.len() != spec.atoms {
                return Err(field_err(path, &field, format!("permutation of length {} on {} atoms", g.len(), spec.atoms)));
            }
            let mut seen = vec![false; spec.atoms];
            for &x in g {
                if x as usize >= spec.atoms || std::mem::replace(&mut seen[x as usize], true) {
                    return Err(field_err(path, &field, "not a permutation"));
                }
            }
        }
    }
    let levels = spec.levels.into_iter().map(|l| l.generators).collect();
    FilteredAction::new(space, levels).map_err(|e| field_err(path, "levels", e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelSpec {
    group: GroupSpec,
    table: Vec<Vec<Value>>,
}

/// A kernel spec `{group: {cyclic_orders}, table: [[p(b) for b] for x]}`.
pub fn read_kernel(path: &Path) -> InputResult<KernelMap> {
    let spec: KernelSpec = read_json(path)?;
    let group = spec.group.build(path, "group.")?;
    let table = spec
        .table
        .iter()
        .enumerate()
        .map(|(x, row)| row.iter().enumerate().map(|(b, v)| rational_entry(path, &format!("table[{}][{}]", x, b), v)).collect())
        .collect::<InputResult<Vec<Vec<Q>>>>()?;
    KernelMap::new(group, table).map_err(|e| field_err(path, "table", e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingSpec {
    weights: Vec<Value>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    entries: Vec<(Vec<u32>, Value)>,
}

/// A coupling spec `{weights, labels?, entries: [[tuple, mass], ...]}`.
pub fn read_coupling(path: &Path) -> InputResult<Coupling> {
    let spec: CouplingSpec = read_json(path)?;
    let base = weights_entry(path, "weights", &spec.weights)?;
    let arity = spec.entries.first().map_or(2, |(t, _)| t.len());
    let labels = match spec.labels {
        Some(ls) => ls.iter().map(|s| Label::name(s)).collect(),
        None => (0..arity).map(|i| Label::name(&((b'a' + i as u8) as char).to_string())).collect(),
    };
    let entries = spec
        .entries
        .iter()
        .enumerate()
        .map(|(i, (t, m))| Ok((t.clone(), rational_entry(path, &format!("entries[{}][1]", i), m)?)))
        .collect::<InputResult<Vec<_>>>()?;
    Coupling::new(base, labels, entries).map_err(|e| field_err(path, "entries", e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionSpec {
    weights: Vec<Value>,
    blocks: Vec<Vec<usize>>,
}

/// A partition spec `{weights, blocks}`.
pub fn read_partition(path: &Path) -> InputResult<(FiniteProbSpace, Partition)> {
    let spec: PartitionSpec = read_json(path)?;
    let space = weights_entry(path, "weights", &spec.weights)?;
    let p = Partition::from_blocks(&space, &spec.blocks).map_err(|e| field_err(path, "blocks", e))?;
    Ok((space, p))
}

/// Parses a vertex written in coordinate order, `∅` for the 0-cube.
pub fn parse_vertex(s: &str) -> Option<Vertex> {
    if s == "∅" {
        return Some(Vertex::root(0));
    }
    let coords = s.chars().map(|c| c.to_digit(2).map(|d| d as u8)).collect::<Option<Vec<u8>>>()?;
    Some(Vertex::from_coords(&coords))
}

pub fn write_batch(path: &Path, batch: &SampleBatch) -> InputResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| InputError(format!("{}: {}", path.display(), e)))?;
    let io = |e: csv::Error| InputError(format!("{}: {}", path.display(), e));
    w.write_record(["sample_id", "vertex", "symbol"]).map_err(io)?;
    let verts = Vertex::all(batch.n)?;
    for (i, s) in batch.samples.iter().enumerate() {
        for (v, y) in verts.iter().zip(s) {
            w.write_record([i.to_string(), v.to_string(), y.to_string()]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| InputError(format!("{}: {}", path.display(), e)))
}

/// Reads `sample_id,vertex,symbol` rows. The alphabet defaults to one past the largest symbol.
pub fn read_batch(path: &Path, alphabet: Option<usize>, seed: u64) -> InputResult<SampleBatch> {
    let mut r = csv::Reader::from_path(path).map_err(|e| InputError(format!("{}: {}", path.display(), e)))?;
    let mut rows: BTreeMap<u64, BTreeMap<usize, u32>> = BTreeMap::new();
    let mut dim: Option<usize> = None;
    for rec in r.records() {
        let rec = rec.map_err(|e| InputError(format!("{}: {}", path.display(), e)))?;
        let line = rec.position().map_or(0, |p| p.line());
        let at = |msg: &str| InputError(format!("{}: line {}: {}", path.display(), line, msg));
        if rec.len() != 3 {
            return Err(at("expected sample_id,vertex,symbol"));
        }
        let id: u64 = rec[0].trim().parse().map_err(|_| at("sample_id is not an integer"))?;
        let v = parse_vertex(rec[1].trim()).ok_or_else(|| at("vertex is not a bit string"))?;
        let y: u32 = rec[2].trim().parse().map_err(|_| at("symbol is not an integer"))?;
        match dim {
            None => dim = Some(v.dim),
            Some(d) if d != v.dim => return Err(at("vertex dimension differs from earlier rows")),
            _ => {}
        }
        if rows.entry(id).or_default().insert(v.index(), y).is_some() {
            return Err(at("repeated vertex within a sample"));
        }
    }
    let n = dim.ok_or_else(|| InputError(format!("{}: no samples", path.display())))?;
    let mut samples = Vec::with_capacity(rows.len());
    for (id, row) in rows {
        if row.len() != 1 << n {
            return Err(InputError(format!("{}: sample {} has {} of {} vertices", path.display(), id, row.len(), 1 << n)));
        }
        samples.push(row.into_values().collect::<Vec<u32>>());
    }
    let max = samples.iter().flatten().copied().max().unwrap_or(0) as usize;
    let alphabet = alphabet.unwrap_or(max + 1);
    if max >= alphabet {
        return Err(InputError(format!("{}: symbol {} outside an alphabet of size {}", path.display(), max, alphabet)));
    }
    Ok(SampleBatch { seed, n, alphabet, samples })
}
