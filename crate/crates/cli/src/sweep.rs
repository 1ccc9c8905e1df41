//! Sweep syntax: `{v1,v2,…}` lists and `[lo:hi:n]` inclusive ranges,
//! expanded as a cartesian product in reading order.

pub fn is_sweep(text: &str) -> bool {
    text.contains(['{', '['])
}

pub fn expand(text: &str) -> Result<Vec<String>, String> {
    let Some(start) = text.find(['{', '[']) else {
        return Ok(vec![text.to_string()]);
    };
    let open = &text[start..start + 1];
    let close = if open == "{" { '}' } else { ']' };
    let end = text[start..].find(close).map(|e| start + e).ok_or_else(|| format!("unclosed `{open}` in `{text}`"))?;
    let inner = &text[start + 1..end];
    if inner.contains(['{', '[']) {
        return Err(format!("nested sweep group in `{text}`"));
    }
    let values = if close == '}' { list(inner)? } else { range(inner)?.iter().map(|v| format!("{v}")).collect() };
    let head = &text[..start];
    let tails = expand(&text[end + 1..])?;
    let mut out = Vec::with_capacity(values.len() * tails.len());
    for v in &values {
        for t in &tails {
            out.push(format!("{head}{v}{t}"));
        }
    }
    Ok(out)
}

fn list(inner: &str) -> Result<Vec<String>, String> {
    let items: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).collect();
    if items.iter().any(String::is_empty) {
        return Err(format!("empty entry in `{{{inner}}}`"));
    }
    Ok(items)
}

fn range(inner: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = inner.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("range `[{inner}]` must be `[lo:hi:n]`"));
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("`{s}` is not a decimal number in `[{inner}]`"));
    let (lo, hi) = (num(lo)?, num(hi)?);
    let n: usize = n.parse().map_err(|_| format!("`{n}` is not a point count in `[{inner}]`"))?;
    match n {
        0 => Err(format!("range `[{inner}]` needs at least one point")),
        1 => Ok(vec![lo]),
        _ => Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()),
    }
}

/// Expands and parses a numeric axis.
pub fn expand_numbers(text: &str) -> Result<Vec<f64>, String> {
    expand(text)?
        .into_iter()
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a decimal number")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(
            expand("komatu c=0 delta={2,3,4}").unwrap(),
            ["komatu c=0 delta=2", "komatu c=0 delta=3", "komatu c=0 delta=4"]
        );
        assert_eq!(expand_numbers("[0:1:5]").unwrap(), [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(expand_numbers("[0.3:0.9:1]").unwrap(), [0.3]);
        assert_eq!(expand("a={1,2} b=[0:1:2]").unwrap(), ["a=1 b=0", "a=1 b=1", "a=2 b=0", "a=2 b=1"]);
        assert_eq!(expand("plain").unwrap(), ["plain"]);
    }

    #[test]
    fn malformed_groups() {
        assert!(expand("{1,2").is_err());
        assert!(expand("{1,,2}").is_err());
        assert!(expand("[0:1]").is_err());
        assert!(expand("[0:1:0]").is_err());
        assert!(expand("{[0:1:2]}").is_err());
        assert!(expand_numbers("{1,x}").is_err());
    }
}
