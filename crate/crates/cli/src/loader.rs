//! Graph loader and saver for the tab-separated interchange format.
//!
//! One tuple per line, UTF-8, `#` comments and blank lines ignored:
//!
//! * vertices: `id <TAB> start <TAB> end`
//! * edges: `src <TAB> dst <TAB> start <TAB> end`
//! * vertex attributes: `id <TAB> start <TAB> end <TAB> json-object`
//! * edge attributes: `src <TAB> dst <TAB> start <TAB> end <TAB> json-object`
//!
//! Time fields follow the manifest's resolution (integers or ISO dates).
//! Property values use JSON with tagged collections: scalars map directly,
//! `{"set": [...]}`, `{"list": [...]}` and `{"map": {...}}` wrap the
//! collection kinds. Saving writes canonically sorted, coalesced tuples, so
//! save → load → save is byte-identical.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use tgraph_core::{
    EdgeKey, Interval, PropertySet, PropertyValue, TGraph, TemporalRelation, TimePoint, VertexId,
};

use crate::manifest::{Counts, DatasetManifest, ManifestFile, TimeMapper};

/// Everything that can go wrong between a manifest path and a valid graph.
/// `Io`, `Manifest` and `Line` are parse-level problems; `Rules` means the
/// files parsed but do not form a valid graph.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Rules { path: PathBuf, message: String },
}

fn line_error(path: &Path, line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Line {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Decodes one JSON value into a property value.
fn decode_value(v: &serde_json::Value) -> Result<PropertyValue, String> {
    use serde_json::Value;
    match v {
        Value::Null => Err("null is not a property value".to_string()),
        Value::Bool(b) => Ok(PropertyValue::Bool(*b)),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(PropertyValue::Int(i))
            } else if let Some(f) = n.as_f64() {
                Ok(PropertyValue::float(f))
            } else {
                Err(format!("number {n} does not fit the value model"))
            }
        }
        Value::String(s) => Ok(PropertyValue::Text(s.clone())),
        Value::Array(_) => {
            Err("untagged collection; wrap it as {\"list\": [...]} or {\"set\": [...]}".to_string())
        }
        Value::Object(m) => {
            if m.len() != 1 {
                return Err("a collection object must hold exactly one type tag".to_string());
            }
            let (tag, inner) = m.iter().next().expect("len checked");
            match (tag.as_str(), inner) {
                ("set", Value::Array(xs)) => Ok(PropertyValue::Set(
                    xs.iter().map(decode_value).collect::<Result<_, _>>()?,
                )),
                ("list", Value::Array(xs)) => Ok(PropertyValue::List(
                    xs.iter().map(decode_value).collect::<Result<_, _>>()?,
                )),
                ("map", Value::Object(entries)) => Ok(PropertyValue::Map(
                    entries
                        .iter()
                        .map(|(k, x)| Ok((k.clone(), decode_value(x)?)))
                        .collect::<Result<BTreeMap<_, _>, String>>()?,
                )),
                ("set" | "list", _) => Err(format!("tag `{tag}` needs a JSON array")),
                ("map", _) => Err("tag `map` needs a JSON object".to_string()),
                (other, _) => Err(format!("unknown property type tag `{other}`")),
            }
        }
    }
}

/// Encodes a property value as interchange JSON.
fn encode_value(v: &PropertyValue) -> Result<serde_json::Value, String> {
    use serde_json::{json, Value};
    Ok(match v {
        PropertyValue::Bool(b) => json!(b),
        PropertyValue::Int(i) => json!(i),
        PropertyValue::Float(x) => {
            if !x.0.is_finite() {
                return Err(format!("non-finite float {} cannot be saved", x.0));
            }
            json!(x.0)
        }
        PropertyValue::Text(s) => json!(s),
        PropertyValue::List(xs) => json!({
            "list": xs.iter().map(encode_value).collect::<Result<Vec<_>, _>>()?
        }),
        PropertyValue::Set(xs) => json!({
            "set": xs.iter().map(encode_value).collect::<Result<Vec<_>, _>>()?
        }),
        PropertyValue::Map(entries) => {
            let mut m = serde_json::Map::new();
            for (k, x) in entries {
                m.insert(k.clone(), encode_value(x)?);
            }
            Value::Object([("map".to_string(), Value::Object(m))].into_iter().collect())
        }
    })
}

fn decode_props(text: &str) -> Result<PropertySet, String> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("bad JSON properties: {e}"))?;
    let serde_json::Value::Object(entries) = v else {
        return Err("properties must be a JSON object".to_string());
    };
    if entries.is_empty() {
        return Err("empty property object".to_string());
    }
    let mut out = PropertySet::new();
    for (name, value) in &entries {
        out.insert(name.clone(), decode_value(value).map_err(|e| format!("property `{name}`: {e}"))?);
    }
    Ok(out)
}

fn encode_props(ps: &PropertySet) -> Result<String, String> {
    let mut m = serde_json::Map::new();
    for (name, value) in ps.iter() {
        m.insert(name.clone(), encode_value(value)?);
    }
    serde_json::to_string(&serde_json::Value::Object(m)).map_err(|e| e.to_string())
}

/// Data lines of a file with their 1-based line numbers.
fn data_lines(path: &Path) -> Result<Vec<(usize, String)>, LoadError> {
    let file = std::fs::File::open(path).map_err(|e| LoadError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| LoadError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        out.push((idx + 1, trimmed.to_string()));
    }
    Ok(out)
}

fn parse_id(field: &str) -> Result<VertexId, String> {
    field
        .parse::<u64>()
        .map(VertexId)
        .map_err(|_| format!("`{field}` is not a vertex id"))
}

fn parse_interval(
    mapper: &TimeMapper,
    start: &str,
    end: &str,
) -> Result<Interval, String> {
    let s = mapper.to_point(start)?;
    let e = mapper.to_point(end)?;
    Interval::new(TimePoint(s), TimePoint(e))
        .map_err(|_| format!("interval start {start} is not before end {end}"))
}

fn split_fields(line: &str, n: usize) -> Option<Vec<&str>> {
    // Property JSON never holds a raw tab (JSON escapes control characters),
    // so a plain split is unambiguous; the last field soaks up nothing extra.
    let fields: Vec<&str> = line.splitn(n, '\t').collect();
    (fields.len() == n && fields.iter().all(|f| !f.is_empty())).then_some(fields)
}

struct Loaded {
    graph: TGraph,
    line_counts: [usize; 4],
}

fn read_all(manifest: &DatasetManifest) -> Result<Loaded, LoadError> {
    let mapper = &manifest.mapper;
    let directed = manifest.directed;

    let mut tv_rows = Vec::new();
    let vlines = data_lines(&manifest.vertices)?;
    for (ln, line) in &vlines {
        let f = split_fields(line, 3)
            .ok_or_else(|| line_error(&manifest.vertices, *ln, "expected 3 tab-separated fields"))?;
        let id = parse_id(f[0]).map_err(|m| line_error(&manifest.vertices, *ln, m))?;
        let iv = parse_interval(mapper, f[1], f[2])
            .map_err(|m| line_error(&manifest.vertices, *ln, m))?;
        tv_rows.push((id, (), iv));
    }

    let mut te_rows = Vec::new();
    let elines = data_lines(&manifest.edges)?;
    for (ln, line) in &elines {
        let f = split_fields(line, 4)
            .ok_or_else(|| line_error(&manifest.edges, *ln, "expected 4 tab-separated fields"))?;
        let src = parse_id(f[0]).map_err(|m| line_error(&manifest.edges, *ln, m))?;
        let dst = parse_id(f[1]).map_err(|m| line_error(&manifest.edges, *ln, m))?;
        let iv = parse_interval(mapper, f[2], f[3])
            .map_err(|m| line_error(&manifest.edges, *ln, m))?;
        te_rows.push((EdgeKey::new(src, dst).canonical(directed), (), iv));
    }

    let mut tav_rows = Vec::new();
    let mut va_count = 0;
    if let Some(path) = &manifest.vertex_attrs {
        let lines = data_lines(path)?;
        va_count = lines.len();
        for (ln, line) in &lines {
            let f = split_fields(line, 4)
                .ok_or_else(|| line_error(path, *ln, "expected 4 tab-separated fields"))?;
            let id = parse_id(f[0]).map_err(|m| line_error(path, *ln, m))?;
            let iv = parse_interval(mapper, f[1], f[2]).map_err(|m| line_error(path, *ln, m))?;
            let ps = decode_props(f[3]).map_err(|m| line_error(path, *ln, m))?;
            tav_rows.push((id, ps, iv));
        }
    }

    let mut tae_rows = Vec::new();
    let mut ea_count = 0;
    if let Some(path) = &manifest.edge_attrs {
        let lines = data_lines(path)?;
        ea_count = lines.len();
        for (ln, line) in &lines {
            let f = split_fields(line, 5)
                .ok_or_else(|| line_error(path, *ln, "expected 5 tab-separated fields"))?;
            let src = parse_id(f[0]).map_err(|m| line_error(path, *ln, m))?;
            let dst = parse_id(f[1]).map_err(|m| line_error(path, *ln, m))?;
            let iv = parse_interval(mapper, f[2], f[3]).map_err(|m| line_error(path, *ln, m))?;
            let ps = decode_props(f[4]).map_err(|m| line_error(path, *ln, m))?;
            tae_rows.push((EdgeKey::new(src, dst).canonical(directed), ps, iv));
        }
    }

    let graph = TGraph::from_relations(
        directed,
        TemporalRelation::from_tuples(tv_rows),
        TemporalRelation::from_tuples(te_rows),
        TemporalRelation::from_tuples(tav_rows),
        TemporalRelation::from_tuples(tae_rows),
    )
    .map_err(|e| LoadError::Rules {
        path: manifest.path.clone(),
        message: e.to_string(),
    })?;
    Ok(Loaded {
        graph,
        line_counts: [vlines.len(), elines.len(), va_count, ea_count],
    })
}

fn check_counts(manifest: &DatasetManifest, got: &[usize; 4]) -> Result<(), LoadError> {
    let Some(counts) = &manifest.counts else {
        return Ok(());
    };
    let expect = [
        ("vertices", counts.vertices),
        ("edges", counts.edges),
        ("vertex_attrs", counts.vertex_attrs),
        ("edge_attrs", counts.edge_attrs),
    ];
    for ((label, want), have) in expect.into_iter().zip(got) {
        if let Some(want) = want {
            if want != *have {
                return Err(LoadError::Rules {
                    path: manifest.path.clone(),
                    message: format!("manifest expects {want} {label} tuples, files hold {have}"),
                });
            }
        }
    }
    Ok(())
}

/// Loads the dataset a manifest describes. The result always passes
/// `validate`: the forgiving constructor coalesces records and trims
/// attributes and edges to entity presence.
pub fn load(manifest: &DatasetManifest) -> Result<TGraph, LoadError> {
    let loaded = read_all(manifest)?;
    check_counts(manifest, &loaded.line_counts)?;
    let violations = loaded.graph.validate();
    if !violations.is_empty() {
        let listed: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(LoadError::Rules {
            path: manifest.path.clone(),
            message: listed.join("; "),
        });
    }
    Ok(loaded.graph)
}

/// Convenience: read the manifest at `path`, then load it.
pub fn load_path(path: &Path) -> Result<TGraph, LoadError> {
    load(&DatasetManifest::read(path)?)
}

fn format_point(mapper: &TimeMapper, p: TimePoint) -> Result<String, String> {
    mapper
        .from_point(p.0)
        .ok_or_else(|| format!("point {} has no calendar form at this resolution", p.0))
}

fn save_error(path: &Path, message: impl Into<String>) -> LoadError {
    LoadError::Io {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn write_file(path: &Path, body: String) -> Result<(), LoadError> {
    std::fs::write(path, body).map_err(|e| save_error(path, e.to_string()))
}

/// Saves `g` under `dir` as `dataset.toml` plus relation files, returning
/// the manifest path. Tuples are already canonically sorted and coalesced
/// in the graph, so the output is deterministic.
pub fn save(g: &TGraph, dir: &Path, mapper: &TimeMapper) -> Result<PathBuf, LoadError> {
    std::fs::create_dir_all(dir).map_err(|e| save_error(dir, e.to_string()))?;
    let fmt = |p: TimePoint| format_point(mapper, p);

    let mut vertices = String::new();
    for (v, (), iv) in g.vertices().iter() {
        let (s, e) = (fmt(iv.start()), fmt(iv.end()));
        let (s, e) = (
            s.map_err(|m| save_error(dir, m))?,
            e.map_err(|m| save_error(dir, m))?,
        );
        vertices.push_str(&format!("{}\t{}\t{}\n", v.0, s, e));
    }
    let mut edges = String::new();
    for (k, (), iv) in g.edges().iter() {
        let s = fmt(iv.start()).map_err(|m| save_error(dir, m))?;
        let e = fmt(iv.end()).map_err(|m| save_error(dir, m))?;
        edges.push_str(&format!("{}\t{}\t{}\t{}\n", k.src.0, k.dst.0, s, e));
    }
    let mut vattrs = String::new();
    for (v, ps, iv) in g.vertex_attrs().iter() {
        let s = fmt(iv.start()).map_err(|m| save_error(dir, m))?;
        let e = fmt(iv.end()).map_err(|m| save_error(dir, m))?;
        let json = encode_props(ps).map_err(|m| save_error(dir, m))?;
        vattrs.push_str(&format!("{}\t{}\t{}\t{}\n", v.0, s, e, json));
    }
    let mut eattrs = String::new();
    for (k, ps, iv) in g.edge_attrs().iter() {
        let s = fmt(iv.start()).map_err(|m| save_error(dir, m))?;
        let e = fmt(iv.end()).map_err(|m| save_error(dir, m))?;
        let json = encode_props(ps).map_err(|m| save_error(dir, m))?;
        eattrs.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", k.src.0, k.dst.0, s, e, json));
    }

    write_file(&dir.join("vertices.tsv"), vertices)?;
    write_file(&dir.join("edges.tsv"), edges)?;
    let has_vattrs = !g.vertex_attrs().is_empty();
    let has_eattrs = !g.edge_attrs().is_empty();
    if has_vattrs {
        write_file(&dir.join("vertex-attrs.tsv"), vattrs)?;
    }
    if has_eattrs {
        write_file(&dir.join("edge-attrs.tsv"), eattrs)?;
    }

    let manifest = ManifestFile {
        directed: g.directed(),
        resolution: mapper.resolution_name().to_string(),
        origin: mapper.origin_text(),
        vertices: PathBuf::from("vertices.tsv"),
        edges: PathBuf::from("edges.tsv"),
        vertex_attrs: has_vattrs.then(|| PathBuf::from("vertex-attrs.tsv")),
        edge_attrs: has_eattrs.then(|| PathBuf::from("edge-attrs.tsv")),
        counts: Some(Counts {
            vertices: Some(g.vertices().len()),
            edges: Some(g.edges().len()),
            vertex_attrs: has_vattrs.then(|| g.vertex_attrs().len()),
            edge_attrs: has_eattrs.then(|| g.edge_attrs().len()),
        }),
    };
    let toml_text = toml::to_string_pretty(&manifest)
        .map_err(|e| save_error(dir, format!("manifest serialization: {e}")))?;
    let manifest_path = dir.join("dataset.toml");
    write_file(&manifest_path, toml_text)?;
    Ok(manifest_path)
}
