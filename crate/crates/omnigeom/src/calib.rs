//! `key=value` calibration files, one camera per file.
//!
//! Required keys: `a1 a2 a3 a4 cx cy width height`; `theta_max` is optional.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use omnigeom_core::camera_model::{FisheyeCamera, FisheyeParams};

use crate::error::{CliError, Result};

const REQUIRED: [&str; 8] = ["a1", "a2", "a3", "a4", "cx", "cy", "width", "height"];
const OPTIONAL: [&str; 1] = ["theta_max"];

pub fn parse_calibration(text: &str) -> Result<FisheyeParams> {
    let mut values: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("line {}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
            return Err(CliError::input(format!(
                "line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        if values.insert(key, value).is_some() {
            return Err(CliError::input(format!(
                "line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }
    let real = |key: &str| -> Result<f64> {
        let v = values
            .get(key)
            .ok_or_else(|| CliError::input(format!("missing calibration key '{key}'")))?;
        let x: f64 = v.parse().map_err(|_| {
            CliError::input(format!("calibration key '{key}': '{v}' is not a number"))
        })?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(CliError::input(format!(
                "calibration key '{key}' must be finite"
            )))
        }
    };
    let size = |key: &str| -> Result<usize> {
        let v = values
            .get(key)
            .ok_or_else(|| CliError::input(format!("missing calibration key '{key}'")))?;
        v.parse().map_err(|_| {
            CliError::input(format!(
                "calibration key '{key}': '{v}' is not a pixel count"
            ))
        })
    };
    let coeffs = [real("a1")?, real("a2")?, real("a3")?, real("a4")?];
    Ok(FisheyeParams {
        coeffs,
        cx: real("cx")?,
        cy: real("cy")?,
        width: size("width")?,
        height: size("height")?,
        theta_max: if values.contains_key("theta_max") {
            Some(real("theta_max")?)
        } else {
            None
        },
    })
}

pub fn read_calibration(path: &Path) -> Result<FisheyeCamera> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let params = parse_calibration(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(FisheyeCamera::new(params)?)
}

pub fn format_calibration(p: &FisheyeParams) -> String {
    let mut s = String::new();
    for (i, a) in p.coeffs.iter().enumerate() {
        let _ = writeln!(s, "a{}={a:?}", i + 1);
    }
    let _ = writeln!(
        s,
        "cx={:?}\ncy={:?}\nwidth={}\nheight={}",
        p.cx, p.cy, p.width, p.height
    );
    if let Some(t) = p.theta_max {
        let _ = writeln!(s, "theta_max={t:?}");
    }
    s
}

/// Camera used by the demos when no calibration file is given.
pub fn demo_params() -> FisheyeParams {
    FisheyeParams {
        coeffs: [320.0, -8.0, 3.0, -1.0],
        cx: 319.5,
        cy: 239.5,
        width: 640,
        height: 480,
        theta_max: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let p = demo_params();
        assert_eq!(parse_calibration(&format_calibration(&p)).unwrap(), p);
        let with_max = FisheyeParams {
            theta_max: Some(1.2),
            ..p
        };
        assert_eq!(
            parse_calibration(&format_calibration(&with_max)).unwrap(),
            with_max
        );

        let missing = format_calibration(&p).replace("a4=-1.0\n", "");
        let err = parse_calibration(&missing).unwrap_err();
        assert!(err.to_string().contains("'a4'"), "{err}");
        assert_eq!(err.exit_code(), 2);

        assert!(parse_calibration(&format!("{}a1=3\n", format_calibration(&p))).is_err());
        assert!(parse_calibration(&format!("{}focal=3\n", format_calibration(&p))).is_err());
        assert!(parse_calibration(&format_calibration(&p).replace("cx=319.5", "cx=abc")).is_err());
        assert!(parse_calibration("# comment\n\n a1 = 1").is_err());
    }
}
