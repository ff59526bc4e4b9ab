//! File formats: CSV count tables, CSV probability tables and JSON
//! parameter files.

use diageff::param::{uniform_vector, MixtureParams, ModelParams, ToricParams};
use diageff::rational::{format_q, parse_q};
use diageff::{CountTable, Error, ModelFamily, ProbTable, Q};
use num_traits::{One, Signed, Zero};
use serde_json::{Map, Value};

/// Non-empty lines with the 1-based line number, split into trimmed fields
/// paired with their 1-based character column.
fn csv_rows(text: &str) -> Vec<(usize, Vec<(usize, &str)>)> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(k, line)| {
            let mut fields = Vec::new();
            let mut start = 0;
            for piece in line.split(',') {
                let lead = piece.len() - piece.trim_start().len();
                fields.push((start + lead + 1, piece.trim()));
                start += piece.len() + 1;
            }
            (k + 1, fields)
        })
        .collect()
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn square_cells<T>(text: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<(usize, Vec<T>), Error> {
    let rows = csv_rows(text);
    let Some((_, first)) = rows.first() else {
        return Err(parse_error(1, 1, "empty table"));
    };
    let width = first.len();
    let mut cells = Vec::with_capacity(width * width);
    for (line, fields) in &rows {
        if fields.len() != width {
            let column = fields.last().map_or(1, |f| f.0);
            return Err(parse_error(*line, column, format!("expected {width} entries, found {}", fields.len())));
        }
        for &(column, field) in fields {
            cells.push(parse(field).map_err(|m| parse_error(*line, column, m))?);
        }
    }
    if rows.len() != width {
        let (line, _) = rows.last().unwrap();
        return Err(parse_error(*line, 1, format!("table has {} rows and {width} columns; it must be square", rows.len())));
    }
    Ok((width, cells))
}

/// `I` lines of `I` comma-separated nonnegative integers.
pub fn parse_count_table(text: &str) -> Result<CountTable, Error> {
    let (size, cells) = square_cells(text, |field| {
        if field.is_empty() {
            return Err("empty entry".into());
        }
        if field.starts_with('-') && field[1..].chars().all(|c| c.is_ascii_digit()) && field.len() > 1 {
            return Err(format!("negative count `{field}`"));
        }
        field.parse::<u64>().map_err(|_| format!("`{field}` is not a nonnegative integer"))
    })?;
    CountTable::from_cells(size, cells)
}

/// Square CSV of nonnegative rationals (`a/b` or integers), rescaled to sum
/// to one. Count tables are accepted as they are.
pub fn parse_prob_table(text: &str) -> Result<ProbTable, Error> {
    let (size, cells) = square_cells(text, |field| {
        let v = parse_q(field).map_err(|_| format!("`{field}` is not a rational number"))?;
        if v.is_negative() {
            return Err(format!("negative entry `{field}`"));
        }
        Ok(v)
    })?;
    let total: Q = cells.iter().fold(Q::zero(), |a, b| a + b);
    if total.is_zero() {
        return Err(Error::InvalidTable("all entries are zero".into()));
    }
    ProbTable::from_cells(size, cells.into_iter().map(|c| c / &total).collect())
}

fn rational(field: &str, value: &Value) -> Result<Q, Error> {
    match value {
        Value::String(s) => parse_q(s).map_err(|_| Error::params(field, format!("`{s}` is not a rational number"))),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Q::from_integer(i.into())),
            None => Err(Error::params(field, format!("{n} is not an integer; write fractions as \"num/den\""))),
        },
        other => Err(Error::params(field, format!("expected a rational, found {other}"))),
    }
}

fn vector(obj: &Map<String, Value>, field: &str) -> Result<Option<Vec<Q>>, Error> {
    match obj.get(field) {
        None => Ok(None),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(k, v)| rational(&format!("{field}[{}]", k + 1), v))
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        Some(other) => Err(Error::params(field, format!("expected an array, found {other}"))),
    }
}

fn required(obj: &Map<String, Value>, field: &str) -> Result<Vec<Q>, Error> {
    vector(obj, field)?.ok_or_else(|| Error::params(field, "missing"))
}

const TORIC_KEYS: [&str; 3] = ["zeta_r", "zeta_c", "zeta_gamma"];
const MIXTURE_KEYS: [&str; 4] = ["alpha", "r", "c", "d"];

/// Toric (`zeta_r`, `zeta_c`, `zeta_gamma`) or mixture (`alpha`, `r`, `c`,
/// `d`) parameters. Rationals are strings `"num/den"` or JSON integers.
/// `zeta_gamma` may be a single rational for a shared diagonal parameter;
/// `d` may be omitted when `family` is the common-diagonal model.
pub fn parse_params(text: &str, family: Option<ModelFamily>) -> Result<ModelParams, Error> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_error(e.line(), e.column(), e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(parse_error(1, 1, "expected a JSON object"));
    };
    let toric = obj.contains_key("zeta_r");
    let allowed: &[&str] = if toric { &TORIC_KEYS } else { &MIXTURE_KEYS };
    if let Some(key) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::params(key, "unknown field"));
    }
    if toric {
        let zeta_r = required(&obj, "zeta_r")?;
        let zeta_c = required(&obj, "zeta_c")?;
        let zeta_g = match obj.get("zeta_gamma") {
            Some(v @ (Value::String(_) | Value::Number(_))) => vec![rational("zeta_gamma", v)?; zeta_r.len()],
            _ => required(&obj, "zeta_gamma")?,
        };
        return Ok(ModelParams::Toric(ToricParams::new(zeta_r, zeta_c, zeta_g)?));
    }
    let alpha = rational("alpha", obj.get("alpha").ok_or_else(|| Error::params("alpha", "missing"))?)?;
    if alpha.is_negative() || alpha > Q::one() {
        return Err(Error::params("alpha", format!("{} is outside [0,1]", format_q(&alpha))));
    }
    let r = required(&obj, "r")?;
    let c = required(&obj, "c")?;
    let d = match vector(&obj, "d")? {
        Some(d) => d,
        None if family == Some(ModelFamily::CommonDiagonalEffect) => uniform_vector(r.len()),
        None => return Err(Error::params("d", "missing (only optional for the common-diagonal model)")),
    };
    Ok(ModelParams::Mixture(MixtureParams::new(alpha, r, c, d)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use diageff::rational::{q, qi};

    #[test]
    fn count_tables() {
        let t = parse_count_table("0,1\n1,0").unwrap();
        assert_eq!(t.cells(), &[0, 1, 1, 0]);
        assert_eq!(parse_count_table(&t.to_string()).unwrap(), t);
        match parse_count_table("1,2\n3") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_count_table("1,-1\n0,0") {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!((line, column), (1, 3));
                assert!(message.contains("negative"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_count_table("1,2.5\n0,0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_count_table("1,2\n3,4\n5,6"), Err(Error::Parse { .. })));
    }

    #[test]
    fn prob_tables_are_normalized() {
        let p = parse_prob_table("0,1/6,1/6\n1/6,0,1/6\n1/6,1/6,0").unwrap();
        assert_eq!(p.get(0, 1), &q(1, 6));
        let counts = parse_prob_table("1,1\n1,1").unwrap();
        assert_eq!(counts.get(1, 1), &q(1, 4));
    }

    #[test]
    fn params() {
        let m = parse_params(
            r#"{"alpha":"3/4","r":["1/3","1/3","1/3"],"c":["1/3","1/3","1/3"],"d":["1/3","1/3","1/3"]}"#,
            None,
        )
        .unwrap();
        assert!(matches!(m, ModelParams::Mixture(ref p) if p.alpha == q(3, 4)));
        match parse_params(r#"{"alpha":"2"}"#, None) {
            Err(Error::InvalidParams { field, .. }) => assert_eq!(field, "alpha"),
            other => panic!("{other:?}"),
        }
        let t = parse_params(r#"{"zeta_r":["1","1","1"],"zeta_c":["1","1","1"],"zeta_gamma":["2","2","2"]}"#, None).unwrap();
        assert!(matches!(t, ModelParams::Toric(ref p) if p.zeta_g == vec![qi(2); 3]));
        let shared = parse_params(r#"{"zeta_r":[1,1],"zeta_c":[1,2],"zeta_gamma":"5/2"}"#, None).unwrap();
        assert!(matches!(shared, ModelParams::Toric(ref p) if p.has_common_diagonal()));
    }

    #[test]
    fn common_mixture_defaults_d() {
        let text = r#"{"alpha":"1/2","r":["1/2","1/2"],"c":["1/4","3/4"]}"#;
        assert!(parse_params(text, None).is_err());
        let m = parse_params(text, Some(ModelFamily::CommonDiagonalEffect)).unwrap();
        assert!(matches!(m, ModelParams::Mixture(ref p) if p.d == vec![q(1, 2); 2]));
    }

    #[test]
    fn params_diagnostics() {
        match parse_params(r#"{"alpha":"1/2","r":["1/2","1/3"],"c":["1/2","1/2"],"d":["1/2","1/2"]}"#, None) {
            Err(Error::InvalidParams { field, reason }) => {
                assert_eq!(field, "r");
                assert!(reason.contains("5/6"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_params(r#"{"zeta_r":[1.5]}"#, None), Err(Error::InvalidParams { .. })));
        assert!(matches!(parse_params("{", None), Err(Error::Parse { .. })));
        assert!(matches!(parse_params(r#"{"alpha":1,"bogus":1}"#, None), Err(Error::InvalidParams { .. })));
    }
}
