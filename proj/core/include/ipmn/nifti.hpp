#pragma once

#include <filesystem>

#include "ipmn/volume.hpp"

namespace ipmn {

/// NIfTI-1 single-file reader/writer (.nii, .nii.gz), little-endian,
/// 3D only, datatypes uint8 / int16 / float32.
///
/// Spacing comes from pixdim[1..3]. Orientation comes from the sform when
/// sform_code > 0, otherwise from the qform quaternion, otherwise identity.
/// scl_slope / scl_inter are applied when the slope is nonzero.
Volume load_nifti_volume(const std::filesystem::path& path);

/// As load_nifti_volume, then binarizes (value > 0).
Mask load_nifti_mask(const std::filesystem::path& path);

/// Volumes are written as float32, masks as uint8; gzip when the name ends in .gz.
void save_nifti(const Volume& v, const std::filesystem::path& path);
void save_nifti(const Mask& m, const std::filesystem::path& path);

}  // namespace ipmn
