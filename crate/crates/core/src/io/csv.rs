use crate::error::{Error, Result};
use crate::model::LabelMap;

fn csv_err(row: usize, message: impl Into<String>) -> Error {
    Error::Csv {
        row,
        message: message.into(),
    }
}

/// Comma-separated non-negative integers, one image row per line. Rows are
/// numbered from 1 in error messages; trailing blank lines are ignored.
pub(crate) fn decode(bytes: &[u8]) -> Result<LabelMap> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        offset: e.valid_up_to(),
        message: "CSV is not valid UTF-8".into(),
    })?;
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if lines.is_empty() {
        return Err(csv_err(1, "no data"));
    }
    let mut width = None;
    let mut labels = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let row = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(csv_err(
                    row,
                    format!("expected {w} fields, found {}", fields.len()),
                ))
            }
            _ => {}
        }
        for (col, f) in fields.iter().enumerate() {
            let v = f
                .parse::<u32>()
                .map_err(|_| csv_err(row, format!("field {} is not a label: {f:?}", col + 1)))?;
            labels.push(v);
        }
    }
    LabelMap::new(width.expect("at least one row"), lines.len(), labels)
}

pub(crate) fn encode(labels: &LabelMap) -> Vec<u8> {
    let mut out = String::new();
    for row in labels.as_slice().chunks(labels.width()) {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_map() {
        let m = decode(b"0,0\n1,1").unwrap();
        assert_eq!(m.dimensions(), (2, 2));
        assert_eq!(m.as_slice(), &[0, 0, 1, 1]);
        assert_eq!(decode(b"0, 0\r\n1 ,1\n\n").unwrap(), m);
    }

    #[test]
    fn ragged_rows_name_the_row() {
        match decode(b"0,0\n1,1\n2\n") {
            Err(Error::Csv { row: 3, message }) => assert!(message.contains("expected 2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_fields() {
        assert!(matches!(decode(b"0,x\n"), Err(Error::Csv { row: 1, .. })));
        assert!(matches!(
            decode(b"0,1\n-1,2\n"),
            Err(Error::Csv { row: 2, .. })
        ));
        assert!(matches!(decode(b"\n\n"), Err(Error::Csv { row: 1, .. })));
    }

    #[test]
    fn round_trip() {
        let m = LabelMap::from_fn(4, 3, |x, y| (x * 1000 + y) as u32).unwrap();
        assert_eq!(decode(&encode(&m)).unwrap(), m);
    }
}
