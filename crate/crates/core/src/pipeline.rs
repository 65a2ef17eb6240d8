//! Lift, restore and project in one call.

use crate::error::{Error, Result};
use crate::image::GreyImage;
use crate::lift::{lift, project_max, Calibration};
use crate::params::DiffusionParams;
use crate::restore::{restore, RestorationOutput};

#[derive(Debug, Clone, PartialEq)]
pub struct InpaintOutput {
    pub image: GreyImage,
    pub restoration: RestorationOutput,
}

/// Runs the configured restoration on `img` (bad pixels given by its mask)
/// and max-projects, calibrated to the good pixels of the input.
pub fn inpaint(img: &GreyImage, p: &DiffusionParams) -> Result<InpaintOutput> {
    p.validate()?;
    if img.size() != p.size {
        return Err(Error::Dimension(format!("image is {0}x{0} but M = {1}", img.size(), p.size)));
    }
    let mask = img.good_mask();
    let lifted = lift(img, p)?;
    let restoration = restore(&lifted, &mask, p, None)?;
    let calibration = Calibration::from_image(img);
    let image = project_max(&restoration.stack, calibration.as_ref())?
        .with_mask(mask)?
        .with_provenance(format!("inpainted from {}", img.provenance));
    Ok(InpaintOutput { image, restoration })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Mode;
    use crate::synth::{corrupt, grid_mask, smooth_field};

    #[test]
    fn zero_time_is_lift_then_project() {
        let img = corrupt(&smooth_field(16, 1).unwrap(), &grid_mask(16, 1, 0.3).unwrap()).unwrap();
        let p = DiffusionParams::new(16, 6, 0.3, 0.0).with_restoration(Mode::Plain, 1, 0.0);
        let out = inpaint(&img, &p).unwrap();
        let expected = project_max(&lift(&img, &p).unwrap(), Calibration::from_image(&img).as_ref()).unwrap();
        assert_eq!(out.image.values(), expected.values());
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let img = smooth_field(8, 1).unwrap();
        assert!(inpaint(&img, &DiffusionParams::new(16, 6, 0.3, 1.0)).is_err());
    }
}
