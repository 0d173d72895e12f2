use std::path::Path;

use rayon::prelude::*;

use super::{list_pngs, Context};
use crate::error::{Error, Result};
use crate::io::{read_image, write_image};
use crate::trafficlight::convert_color;

/// Converts every crop and writes it under the output directory with the
/// same file name. Returns the written paths in input order.
pub fn run_convert_light(ctx: &Context, input: &Path) -> Result<Vec<std::path::PathBuf>> {
    let files = list_pngs(input)?;
    if files.is_empty() {
        return Err(Error::MissingInput(format!("no PNG files in {}", input.display())));
    }
    let params = &ctx.config.traffic_light;
    ctx.pool()?.install(|| {
        files
            .par_iter()
            .map(|f| {
                let out = ctx.out(&f.file_name().expect("listed file").to_string_lossy());
                if out == *f {
                    return Err(Error::InvalidParameter(format!("output would overwrite input {}", f.display())));
                }
                write_image(&out, &convert_color(&read_image(f)?, params)?)?;
                Ok(out)
            })
            .collect()
    })
}
