use std::fmt;

use anyhow::{bail, Result};
use serde_json::{json, Map, Value};

use zerosum::invariants::{compute, q_prime, Invariant, InvariantRecord, INVARIANT_NAMES};
use zerosum::omega::{finiteness_check, FinitenessReport, LengthSet, OmegaProperty, OmegaSpec, DEFAULT_ENUMERATION_LIMIT};
use zerosum::search::{MonotoneProperty, Outcome, SearchOptions};
use zerosum::sequence::parse_form;
use zerosum::structure::{self, QOutcome, VolOptions};
use zerosum::Group;

use crate::cache::{cache_key, default_path, ResultCache};
use crate::{Format, GlobalArgs, Status};

/// Malformed command-line input.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn parse_group(text: &str) -> Result<Group> {
    Ok(Group::parse(text)?)
}

/// `3`, `2,4`, `1..4` (inclusive) or `all`.
pub fn parse_lengths(text: &str) -> Result<LengthSet> {
    let text = text.trim();
    let number = |s: &str| s.trim().parse::<u64>().map_err(|_| usage(format!("bad length `{s}`")));
    if text == "all" {
        return Ok(LengthSet::All);
    }
    if let Some((lo, hi)) = text.split_once("..") {
        return Ok(LengthSet::interval(number(lo)?, number(hi)?)?);
    }
    let lengths = text.split(',').map(number).collect::<Result<Vec<_>>>()?;
    Ok(LengthSet::finite(lengths)?)
}

/// `a..b`, inclusive.
fn parse_range(text: &str) -> Result<(u64, u64)> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| usage(format!("expected a range a..b, got `{text}`")))?;
    let n = |s: &str| s.trim().parse::<u64>().map_err(|_| usage(format!("bad bound `{s}`")));
    Ok((n(lo)?, n(hi)?))
}

pub fn options(g: &GlobalArgs) -> SearchOptions {
    SearchOptions::default().with_jobs(g.jobs).with_max_calls(g.budget)
}

/// Writes to stdout; a closed pipe (`| head`) ends output quietly.
pub fn out(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

pub fn emit(g: &GlobalArgs, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    out(&format!("{text}\n"))?;
    if let Some(path) = &g.certificate {
        std::fs::write(path, text + "\n")?;
    }
    Ok(())
}

fn open_cache(g: &GlobalArgs) -> Option<ResultCache> {
    if g.no_cache {
        return None;
    }
    Some(ResultCache::open(&g.cache_file.clone().unwrap_or_else(default_path)))
}

/// A finite outcome's certificate must have length `value − 1` and fail the
/// property. Anything else invalidates the entry.
fn certificate_checks<P: MonotoneProperty>(prop: &P, record: &Value, group: &Group) -> bool {
    let Ok(outcome) = serde_json::from_value::<Outcome>(record["outcome"].clone()) else {
        return false;
    };
    let Outcome::Finite { value } = outcome else {
        return false;
    };
    let Some(text) = record["certificate"].as_str() else {
        return false;
    };
    match parse_form(text, group) {
        Ok(cert) => value >= 1 && cert.len() as u64 == value - 1 && matches!(prop.evaluate(&cert), Ok(false)),
        Err(_) => false,
    }
}

/// Looks the key up, re-verifying before reuse; computes and stores on a
/// miss. Only finite outcomes are stored.
fn through_cache(
    cache: &mut Option<ResultCache>,
    key: String,
    verify: impl Fn(&Value) -> bool,
    compute: impl FnOnce() -> Result<Value>,
) -> Result<Value> {
    if let Some(c) = cache.as_mut() {
        if let Some(hit) = c.get(&key).cloned() {
            if verify(&hit) {
                return Ok(hit);
            }
            eprintln!("cache: entry failed re-verification, recomputing");
            c.invalidate(&key);
        }
    }
    let value = compute()?;
    if let Some(c) = cache.as_mut() {
        if verify(&value) {
            c.insert(key, value.clone());
        }
    }
    Ok(value)
}

fn outcome_status(record: &Value) -> Status {
    match record["outcome"]["kind"].as_str() {
        Some("unknown") => Status::Unknown,
        _ => Status::Success,
    }
}

fn invariant_record(
    g: &GlobalArgs,
    cache: &mut Option<ResultCache>,
    group: &Group,
    invariant: &Invariant,
) -> Result<Value> {
    let key = cache_key(&group.to_string(), "invariant", &json!({"name": invariant.name(), "params": invariant.params()}));
    let prop = invariant.property(group)?;
    through_cache(
        cache,
        key,
        |v| certificate_checks(&prop, v, group),
        || {
            let result = compute(invariant, group, &options(g))?;
            Ok(InvariantRecord::new(invariant, group, &result).to_json())
        },
    )
}

fn parse_invariant(name: &str, lengths: Option<&str>) -> Result<Invariant> {
    if !INVARIANT_NAMES.contains(&name) {
        return Err(usage(format!("unknown invariant `{name}`; expected one of {}", INVARIANT_NAMES.join(", "))));
    }
    let lengths = match lengths {
        Some(text) if name == "dL" => Some(parse_lengths(text)?),
        Some(_) => return Err(usage("--lengths only applies to dL")),
        None if name == "dL" => return Err(usage("dL needs --lengths")),
        None => None,
    };
    Ok(Invariant::parse(name, lengths)?)
}

pub fn invariant(g: &GlobalArgs, group: &str, name: &str, lengths: Option<&str>) -> Result<Status> {
    let group = parse_group(group)?;
    let invariant = parse_invariant(name, lengths)?;
    let mut cache = open_cache(g);
    let record = invariant_record(g, &mut cache, &group, &invariant)?;
    if let Some(c) = cache.as_mut() {
        c.save()?;
    }
    emit(g, &record)?;
    Ok(outcome_status(&record))
}

fn parse_omega(text: &str, group: &Group) -> Result<OmegaSpec> {
    let value: Value = serde_json::from_str(text).map_err(|e| usage(format!("Ω is not valid JSON: {e}")))?;
    Ok(OmegaSpec::from_json(&value, group)?)
}

pub fn domega(g: &GlobalArgs, group: &str, omega: &str) -> Result<Status> {
    let group = parse_group(group)?;
    let spec = parse_omega(omega, &group)?;
    let canonical = spec.to_json(&group);
    let key = cache_key(&group.to_string(), "domega", &canonical);
    let prop = OmegaProperty::new(spec.clone(), group.clone())?;
    let verify = |v: &Value| match v["result"]["outcome"]["kind"].as_str() {
        Some("finite") => certificate_checks(&prop, &v["result"], &group),
        Some("infinite") => match finiteness_check(&spec, &group, u64::MAX) {
            FinitenessReport::Infinite { witness } => {
                v["result"]["outcome"]["witness"].as_str() == Some(group.format_element(witness).as_str())
            }
            _ => false,
        },
        _ => false,
    };
    let mut cache = open_cache(g);
    let record = through_cache(&mut cache, key, verify, || {
        let result = structure::d_omega(&spec, &group, &options(g))?;
        let mut out = json!({
            "group": group.factors(),
            "omega": canonical,
            "version": zerosum::VERSION,
        });
        if let (Value::Object(out), Value::Object(extra)) = (&mut out, result.to_json(&group)) {
            out.extend(extra);
        }
        Ok(out)
    })?;
    if let Some(c) = cache.as_mut() {
        c.save()?;
    }
    emit(g, &record)?;
    Ok(outcome_status(&record["result"]))
}

fn table_groups(groups: &[String], cyclic: Option<&str>, rank2: Option<u64>) -> Result<Vec<Group>> {
    let mut out = Vec::new();
    for text in groups {
        out.push(parse_group(text)?);
    }
    if let Some(range) = cyclic {
        let (lo, hi) = parse_range(range)?;
        for n in lo.max(1)..=hi {
            out.push(Group::cyclic(n)?);
        }
    }
    if let Some(max) = rank2 {
        let mut pairs = Vec::new();
        for a in 2..=max {
            for b in (a..=max / a).filter(|b| b % a == 0) {
                pairs.push((a * b, a, b));
            }
        }
        pairs.sort_unstable();
        for (_, a, b) in pairs {
            out.push(Group::new(&[a, b])?);
        }
    }
    if out.is_empty() {
        bail!(usage("no groups given: use --groups, --cyclic or --rank2"));
    }
    Ok(out)
}

pub fn table(
    g: &GlobalArgs,
    groups: &[String],
    cyclic: Option<&str>,
    rank2: Option<u64>,
    invariants: &str,
    lengths: Option<&str>,
    format: Format,
) -> Result<Status> {
    let groups = table_groups(groups, cyclic, rank2)?;
    let names: Vec<&str> = invariants.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let parsed = names
        .iter()
        .map(|n| parse_invariant(n, if *n == "dL" { lengths } else { None }))
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec!["group".to_string(), "order".to_string(), "exponent".to_string()];
    columns.extend(names.iter().map(|n| n.to_string()));
    let mut cache = open_cache(g);
    let mut status = Status::Success;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for group in &groups {
        let mut row = vec![group.to_string(), group.order().to_string(), group.exponent().to_string()];
        for inv in &parsed {
            let record = invariant_record(g, &mut cache, group, inv)?;
            let cell = match record["outcome"]["kind"].as_str() {
                Some("finite") => record["outcome"]["value"].to_string(),
                Some("infinite") => "infinite".to_string(),
                _ => {
                    status = Status::Unknown;
                    "unknown".to_string()
                }
            };
            row.push(cell);
        }
        rows.push(row);
    }
    if let Some(c) = cache.as_mut() {
        c.save()?;
    }
    let text = match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&columns)?;
            for row in &rows {
                w.write_record(row)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (col, cell) in columns.iter().zip(row) {
                        let v = cell.parse::<u64>().map(Value::from).unwrap_or_else(|_| Value::from(cell.as_str()));
                        m.insert(col.clone(), v);
                    }
                    Value::Object(m)
                })
                .collect();
            serde_json::to_string_pretty(&json!({"columns": columns, "rows": rows}))? + "\n"
        }
    };
    out(&text)?;
    if let Some(path) = &g.certificate {
        std::fs::write(path, &text)?;
    }
    Ok(status)
}

pub fn minimal_check(g: &GlobalArgs, group: &str, omega: &str, t: u64) -> Result<Status> {
    let group = parse_group(group)?;
    let spec = parse_omega(omega, &group)?;
    let verdict = structure::is_minimal_omega(&spec, t, &group, &options(g), DEFAULT_ENUMERATION_LIMIT)?;
    emit(
        g,
        &json!({
            "group": group.factors(),
            "omega": spec.to_json(&group),
            "t": t,
            "minimality": verdict.to_json(&group),
        }),
    )?;
    Ok(if verdict.is_minimal().is_some() { Status::Success } else { Status::Unknown })
}

pub fn essential_check(g: &GlobalArgs, group: &str, form: &str, t: u64) -> Result<Status> {
    let group = parse_group(group)?;
    let s = parse_form(form, &group)?;
    let verdict = structure::is_essential(&s, t, &group, &options(g), DEFAULT_ENUMERATION_LIMIT)?;
    emit(
        g,
        &json!({
            "group": group.factors(),
            "sequence": zerosum::sequence::render_form(&s, &group),
            "t": t,
            "essential": verdict.to_json(&group),
        }),
    )?;
    Ok(match verdict {
        structure::EssentialVerdict::Unknown { .. } => Status::Unknown,
        _ => Status::Success,
    })
}

pub fn q(g: &GlobalArgs, group: &str, t_cap: Option<u64>) -> Result<Status> {
    let group = parse_group(group)?;
    let opts = options(g);
    let report = structure::q_of(&group, t_cap, &opts, DEFAULT_ENUMERATION_LIMIT)?;
    let qp = q_prime(&group, &opts)?.value();
    let q_value = match report.outcome {
        QOutcome::Value(v) => Some(v),
        QOutcome::LowerBound(_) => None,
    };
    let mut out = report.to_json(&group);
    out["group"] = json!(group.factors());
    out["question3"] = json!({
        "q": q_value,
        "qPrime": qp,
        "equal": q_value.zip(qp).map(|(a, b)| a == b),
    });
    emit(g, &out)?;
    Ok(if q_value.is_some() { Status::Success } else { Status::Unknown })
}

pub fn vol_scan(g: &GlobalArgs, group: &str, targets: Option<Vec<u64>>, max_supports: usize) -> Result<Status> {
    let group = parse_group(group)?;
    let opts = VolOptions {
        search: options(g),
        targets,
        max_supports,
        ..VolOptions::default()
    };
    let report = structure::vol_scan(&group, &opts)?;
    let mut out = report.to_json(&group);
    out["group"] = json!(group.factors());
    emit(g, &out)?;
    Ok(if report.residue.is_empty() { Status::Success } else { Status::Unknown })
}

pub fn lemke_kleitman(g: &GlobalArgs, p: u64, cap: u64) -> Result<Status> {
    let report = structure::lemke_kleitman_check(p, cap, &options(g), DEFAULT_ENUMERATION_LIMIT)?;
    emit(g, &report.to_json(&Group::cyclic(p)?))?;
    Ok(match (report.equals_p, &report.minimal_check) {
        (None, _) => Status::Unknown,
        (Some(true), Some(v)) if v.is_minimal().is_none() => Status::Unknown,
        _ => Status::Success,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_sets() {
        assert_eq!(parse_lengths("3").unwrap(), LengthSet::single(3));
        assert_eq!(parse_lengths("1..4").unwrap(), LengthSet::interval(1, 4).unwrap());
        assert_eq!(parse_lengths("all").unwrap(), LengthSet::All);
        assert_eq!(parse_lengths("2, 4").unwrap(), LengthSet::finite([2, 4]).unwrap());
        assert!(parse_lengths("x").is_err());
        assert!(parse_lengths("0").is_err());
    }

    #[test]
    fn rank_two_groups_by_order() {
        let groups = table_groups(&[], None, Some(16)).unwrap();
        let names: Vec<String> = groups.iter().map(|g| g.to_string()).collect();
        assert_eq!(names, ["2,2", "2,4", "3,3", "2,6", "2,8", "4,4"]);
    }

    #[test]
    fn invariant_names_are_checked() {
        assert!(parse_invariant("D", None).is_ok());
        assert!(parse_invariant("dL", None).is_err());
        assert!(parse_invariant("D", Some("3")).is_err());
        assert!(parse_invariant("nope", None).is_err());
    }
}
