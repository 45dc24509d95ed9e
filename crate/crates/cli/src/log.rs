//! One event per stderr line: `level key=value ...`.

use std::fmt::Write;

fn emit(level: &str, fields: &[(&str, &str)]) {
    let mut line = level.to_string();
    for (k, v) in fields {
        let plain = !v.is_empty() && !v.contains(|c: char| c.is_whitespace() || c == '"' || c == '=');
        if plain {
            let _ = write!(line, " {k}={v}");
        } else {
            let _ = write!(line, " {k}={v:?}");
        }
    }
    eprintln!("{line}");
}

pub fn info(fields: &[(&str, &str)]) {
    emit("info", fields);
}

pub fn warn(fields: &[(&str, &str)]) {
    emit("warn", fields);
}

pub fn error(fields: &[(&str, &str)]) {
    emit("error", fields);
}
