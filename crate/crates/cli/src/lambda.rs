use num_complex::Complex64;

/// Parses `a+bi`, `a-bi` or a plain real `a`. Whitespace is rejected.
pub fn parse_lambda(s: &str) -> Result<Complex64, String> {
    let bad = || format!("cannot parse '{s}' as a complex number of the form a+bi or a-bi");
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(bad());
    }
    let finite = |v: f64| if v.is_finite() { Ok(v) } else { Err(bad()) };
    let Some(body) = s.strip_suffix('i') else {
        let re = s.parse::<f64>().map_err(|_| bad())?;
        return Ok(Complex64::new(finite(re)?, 0.0));
    };
    // The sign splitting real from imaginary part is the last '+' or '-'
    // that neither starts the string nor belongs to an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re = body[..split].parse::<f64>().map_err(|_| bad())?;
    let im_text = &body[split..];
    let im = match im_text {
        "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(finite(re)?, finite(im)?))
}
