//! Text checkpoint format. Floats are written with the shortest
//! representation that round-trips, so save/load reproduces parameters
//! bit for bit.
//!
//! ```text
//! NETLEARN-CHECKPOINT 1
//! DIMS d_in hidden layers num_classes
//! CLASSES c0 c1 ...
//! PARAMS n
//! <one value per line>
//! ```

use std::path::Path;

use super::{ModelDims, ModelError, ModelParams};

pub fn write_checkpoint(p: &ModelParams, class_names: &[String]) -> String {
    let d = p.dims;
    let mut out = String::new();
    out.push_str("NETLEARN-CHECKPOINT 1\n");
    out.push_str(&format!(
        "DIMS {} {} {} {}\n",
        d.d_in, d.hidden, d.layers, d.num_classes
    ));
    out.push_str(&format!("CLASSES {}\n", class_names.join(" ")));
    let flat = p.to_flat();
    out.push_str(&format!("PARAMS {}\n", flat.len()));
    for v in flat {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn save_checkpoint(
    p: &ModelParams,
    class_names: &[String],
    path: &Path,
) -> Result<(), ModelError> {
    std::fs::write(path, write_checkpoint(p, class_names))?;
    Ok(())
}

pub fn load_checkpoint_str(text: &str) -> Result<(ModelParams, Vec<String>), ModelError> {
    let err = |line: usize, msg: String| ModelError::Format { line, msg };
    let mut lines = text.lines().enumerate();
    let mut next = |expect: &str| {
        lines
            .next()
            .ok_or_else(|| err(0, format!("missing {expect} line")))
    };

    let (i, magic) = next("header")?;
    if magic.trim() != "NETLEARN-CHECKPOINT 1" {
        return Err(err(i + 1, "bad magic line".into()));
    }
    let (i, dims_line) = next("DIMS")?;
    let dims_fields: Vec<&str> = dims_line.split_whitespace().collect();
    if dims_fields.len() != 5 || dims_fields[0] != "DIMS" {
        return Err(err(i + 1, "expected DIMS d_in hidden layers num_classes".into()));
    }
    let nums: Vec<usize> = dims_fields[1..]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()
        .map_err(|e| err(i + 1, format!("bad dimension: {e}")))?;
    let dims = ModelDims::new(nums[0], nums[1], nums[2], nums[3]);

    let (i, classes_line) = next("CLASSES")?;
    let mut class_fields = classes_line.split_whitespace();
    if class_fields.next() != Some("CLASSES") {
        return Err(err(i + 1, "expected CLASSES line".into()));
    }
    let class_names: Vec<String> = class_fields.map(|s| s.to_string()).collect();
    if class_names.len() != dims.num_classes {
        return Err(err(
            i + 1,
            format!(
                "expected {} class names, got {}",
                dims.num_classes,
                class_names.len()
            ),
        ));
    }

    let (i, params_line) = next("PARAMS")?;
    let params_fields: Vec<&str> = params_line.split_whitespace().collect();
    if params_fields.len() != 2 || params_fields[0] != "PARAMS" {
        return Err(err(i + 1, "expected PARAMS n".into()));
    }
    let count: usize = params_fields[1]
        .parse()
        .map_err(|e| err(i + 1, format!("bad parameter count: {e}")))?;

    let mut p = ModelParams::init(dims, 0);
    if p.flat_len() != count {
        return Err(err(
            i + 1,
            format!("dims imply {} parameters, header says {count}", p.flat_len()),
        ));
    }
    let mut flat = Vec::with_capacity(count);
    for _ in 0..count {
        let (j, line) = next("parameter value")?;
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|e| err(j + 1, format!("bad parameter value: {e}")))?;
        flat.push(v);
    }
    p.assign_flat(&flat);
    Ok((p, class_names))
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelParams, Vec<String>), ModelError> {
    let text = std::fs::read_to_string(path)?;
    load_checkpoint_str(&text)
}
