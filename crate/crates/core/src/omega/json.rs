use serde_json::{json, Map, Value};

use super::{LengthSet, OmegaSpec};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::sequence::{parse_form, render_form, SequenceForm};

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

pub fn lengths_to_json(l: &LengthSet) -> Value {
    match l {
        LengthSet::Finite(s) => json!({ "set": s.iter().collect::<Vec<_>>() }),
        LengthSet::Interval(lo, hi) => json!({ "interval": [lo, hi] }),
        LengthSet::All => json!("all"),
    }
}

fn forms_to_json(forms: &[SequenceForm], group: &Group) -> Value {
    Value::Array(forms.iter().map(|f| json!(render_form(f, group))).collect())
}

pub(super) fn to_json(spec: &OmegaSpec, group: &Group) -> Value {
    match spec {
        OmegaSpec::ZeroSumLength(l) => json!({ "zsLength": lengths_to_json(l) }),
        OmegaSpec::Minimal(l) => {
            json!({ "minimal": { "length": l.as_ref().map_or(Value::Null, lengths_to_json) } })
        }
        OmegaSpec::NotMinimal(l) => {
            json!({ "notMinimal": { "length": l.as_ref().map_or(Value::Null, lengths_to_json) } })
        }
        OmegaSpec::Explicit(m) => json!({ "explicit": forms_to_json(m, group) }),
        OmegaSpec::Support { allowed, of } => {
            let allowed: Vec<String> = group
                .elements()
                .filter(|g| allowed & g.bit() != 0)
                .map(|g| group.format_element(g))
                .collect();
            json!({ "support": { "allowed": allowed, "of": to_json(of, group) } })
        }
        OmegaSpec::IndexOne => json!({ "indexOne": {} }),
        OmegaSpec::Union(c) => {
            json!({ "union": c.iter().map(|s| to_json(s, group)).collect::<Vec<_>>() })
        }
        OmegaSpec::Difference { from, remove } => json!({
            "difference": { "from": to_json(from, group), "remove": forms_to_json(remove, group) }
        }),
    }
}

fn single_key(value: &Value) -> Result<(&str, &Value)> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema(format!("expected an object, got {value}")))?;
    if obj.len() != 1 {
        return Err(schema(format!("expected exactly one key, got {}", obj.len())));
    }
    let (k, v) = obj.iter().next().expect("one key");
    Ok((k.as_str(), v))
}

fn as_u64(v: &Value) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| schema(format!("expected a nonnegative integer, got {v}")))
}

pub fn lengths_from_json(value: &Value) -> Result<LengthSet> {
    if value.as_str() == Some("all") {
        return Ok(LengthSet::All);
    }
    match single_key(value)? {
        ("set", Value::Array(items)) => LengthSet::finite(items.iter().map(as_u64).collect::<Result<Vec<_>>>()?),
        ("interval", Value::Array(items)) if items.len() == 2 => {
            LengthSet::interval(as_u64(&items[0])?, as_u64(&items[1])?)
        }
        (k, _) => Err(schema(format!("bad length set key or payload `{k}`"))),
    }
}

fn optional_lengths(payload: &Value) -> Result<Option<LengthSet>> {
    let obj = expect_object(payload, &["length"])?;
    match obj.get("length") {
        None | Some(Value::Null) => Ok(None),
        Some(v) => lengths_from_json(v).map(Some),
    }
}

fn expect_object<'a>(payload: &'a Value, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let obj = payload
        .as_object()
        .ok_or_else(|| schema(format!("expected an object, got {payload}")))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(format!("unexpected key `{k}`")));
    }
    Ok(obj)
}

fn forms_from_json(value: &Value, group: &Group) -> Result<Vec<SequenceForm>> {
    value
        .as_array()
        .ok_or_else(|| schema("expected an array of forms"))?
        .iter()
        .map(|v| {
            let text = v.as_str().ok_or_else(|| schema(format!("expected a form string, got {v}")))?;
            parse_form(text, group)
        })
        .collect()
}

pub(super) fn from_json(value: &Value, group: &Group) -> Result<OmegaSpec> {
    let (key, payload) = single_key(value)?;
    Ok(match key {
        "zsLength" => OmegaSpec::ZeroSumLength(lengths_from_json(payload)?),
        "minimal" => OmegaSpec::Minimal(optional_lengths(payload)?),
        "notMinimal" => OmegaSpec::NotMinimal(optional_lengths(payload)?),
        "explicit" => OmegaSpec::explicit(group, forms_from_json(payload, group)?)?,
        "support" => {
            let obj = expect_object(payload, &["allowed", "of"])?;
            let allowed = obj
                .get("allowed")
                .and_then(Value::as_array)
                .ok_or_else(|| schema("support needs an `allowed` array"))?
                .iter()
                .map(|v| {
                    let t = v.as_str().ok_or_else(|| schema(format!("expected an element string, got {v}")))?;
                    group.parse_element(t)
                })
                .collect::<Result<Vec<_>>>()?;
            let of = obj.get("of").ok_or_else(|| schema("support needs `of`"))?;
            OmegaSpec::support(allowed, from_json(of, group)?)
        }
        "indexOne" => {
            expect_object(payload, &[])?;
            OmegaSpec::IndexOne
        }
        "union" => OmegaSpec::Union(
            payload
                .as_array()
                .ok_or_else(|| schema("union needs an array"))?
                .iter()
                .map(|c| from_json(c, group))
                .collect::<Result<_>>()?,
        ),
        "difference" => {
            let obj = expect_object(payload, &["from", "remove"])?;
            let from = obj.get("from").ok_or_else(|| schema("difference needs `from`"))?;
            let remove = obj.get("remove").ok_or_else(|| schema("difference needs `remove`"))?;
            OmegaSpec::difference(group, from_json(from, group)?, forms_from_json(remove, group)?)?
        }
        other => return Err(schema(format!("unknown Ω key `{other}`"))),
    })
}
