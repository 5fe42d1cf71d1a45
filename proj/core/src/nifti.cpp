#include "ipmn/nifti.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "ipmn/error.hpp"

namespace ipmn {
namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

constexpr int kHeaderSize = 348;
constexpr int kVoxOffset = 352;

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;

// Byte offsets inside the 348-byte NIfTI-1 header.
namespace off {
constexpr int sizeof_hdr = 0;
constexpr int dim = 40;
constexpr int datatype = 70;
constexpr int bitpix = 72;
constexpr int pixdim = 76;
constexpr int vox_offset = 108;
constexpr int scl_slope = 112;
constexpr int scl_inter = 116;
constexpr int xyzt_units = 123;
constexpr int qform_code = 252;
constexpr int sform_code = 254;
constexpr int quatern_b = 256;
constexpr int qoffset_x = 268;
constexpr int srow_x = 280;
constexpr int magic = 344;
}  // namespace off

template <typename T>
T get(const unsigned char* buf, int offset) {
  T v;
  std::memcpy(&v, buf + offset, sizeof(T));
  return v;
}

template <typename T>
void put(unsigned char* buf, int offset, T v) {
  std::memcpy(buf + offset, &v, sizeof(T));
}

struct GzFile {
  gzFile handle = nullptr;
  GzFile(const std::filesystem::path& p, const char* mode) : handle(gzopen(p.c_str(), mode)) {}
  ~GzFile() {
    if (handle) gzclose(handle);
  }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;
};

void read_exact(gzFile f, void* dst, std::size_t n, const std::filesystem::path& path) {
  auto* p = static_cast<unsigned char*>(dst);
  while (n > 0) {
    const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
    const int got = gzread(f, p, chunk);
    if (got <= 0) throw FormatError("truncated NIfTI file: " + path.string());
    p += got;
    n -= static_cast<std::size_t>(got);
  }
}

Mat3 quaternion_to_direction(float qb, float qc, float qd, double qfac) {
  double b = qb, c = qc, d = qd;
  double a = 1.0 - (b * b + c * c + d * d);
  if (a < 1e-7) {
    // 180 degree rotation: renormalize (b,c,d).
    const double s = 1.0 / std::sqrt(b * b + c * c + d * d);
    b *= s;
    c *= s;
    d *= s;
    a = 0.0;
  } else {
    a = std::sqrt(a);
  }
  Mat3 r{{{a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)},
          {2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)},
          {2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b}}};
  for (int row = 0; row < 3; ++row) r[row][2] *= qfac;
  return r;
}

// Inverse of quaternion_to_direction; returns (b, c, d, qfac).
std::array<double, 4> direction_to_quaternion(const Mat3& m) {
  Mat3 r = m;
  const double det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
                     r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
                     r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
  double qfac = 1.0;
  if (det < 0.0) {
    qfac = -1.0;
    for (int row = 0; row < 3; ++row) r[row][2] = -r[row][2];
  }
  double a = r[0][0] + r[1][1] + r[2][2] + 1.0;
  double b, c, d;
  if (a > 0.5) {
    a = 0.5 * std::sqrt(a);
    b = 0.25 * (r[2][1] - r[1][2]) / a;
    c = 0.25 * (r[0][2] - r[2][0]) / a;
    d = 0.25 * (r[1][0] - r[0][1]) / a;
  } else {
    const double xd = 1.0 + r[0][0] - (r[1][1] + r[2][2]);
    const double yd = 1.0 + r[1][1] - (r[0][0] + r[2][2]);
    const double zd = 1.0 + r[2][2] - (r[0][0] + r[1][1]);
    if (xd > 1.0) {
      b = 0.5 * std::sqrt(xd);
      c = 0.25 * (r[0][1] + r[1][0]) / b;
      d = 0.25 * (r[0][2] + r[2][0]) / b;
      a = 0.25 * (r[2][1] - r[1][2]) / b;
    } else if (yd > 1.0) {
      c = 0.5 * std::sqrt(yd);
      b = 0.25 * (r[0][1] + r[1][0]) / c;
      d = 0.25 * (r[1][2] + r[2][1]) / c;
      a = 0.25 * (r[0][2] - r[2][0]) / c;
    } else {
      d = 0.5 * std::sqrt(zd);
      b = 0.25 * (r[0][2] + r[2][0]) / d;
      c = 0.25 * (r[1][2] + r[2][1]) / d;
      a = 0.25 * (r[1][0] - r[0][1]) / d;
    }
    if (a < 0.0) {
      b = -b;
      c = -c;
      d = -d;
    }
  }
  return {b, c, d, qfac};
}

Volume read_nifti(const std::filesystem::path& path) {
  GzFile f(path, "rb");
  if (!f.handle) throw IoError("cannot open NIfTI file: " + path.string());

  unsigned char hdr[kHeaderSize];
  read_exact(f.handle, hdr, kHeaderSize, path);

  if (get<std::int32_t>(hdr, off::sizeof_hdr) != kHeaderSize) {
    throw FormatError("not a little-endian NIfTI-1 header (sizeof_hdr != 348): " + path.string());
  }
  if (std::memcmp(hdr + off::magic, "n+1\0", 4) != 0) {
    throw FormatError("malformed NIfTI magic (expected single-file \"n+1\"): " + path.string());
  }

  const auto ndim = get<std::int16_t>(hdr, off::dim);
  if (ndim != 3) {
    throw FormatError("NIfTI dimension count must be 3, got " + std::to_string(ndim));
  }
  Geometry g;
  for (int a = 0; a < 3; ++a) {
    g.dims[a] = get<std::int16_t>(hdr, off::dim + 2 * (a + 1));
    if (g.dims[a] <= 0) throw FormatError("nonpositive NIfTI dimension");
    const double pd = get<float>(hdr, off::pixdim + 4 * (a + 1));
    if (!(pd > 0.0)) throw FormatError("nonpositive NIfTI pixdim on axis " + std::to_string(a));
    g.spacing[a] = pd;
  }

  const auto datatype = get<std::int16_t>(hdr, off::datatype);
  std::size_t bytes_per_voxel = 0;
  switch (datatype) {
    case kDtUint8: bytes_per_voxel = 1; break;
    case kDtInt16: bytes_per_voxel = 2; break;
    case kDtFloat32: bytes_per_voxel = 4; break;
    default: throw FormatError("unsupported NIfTI datatype " + std::to_string(datatype));
  }

  const auto sform_code = get<std::int16_t>(hdr, off::sform_code);
  const auto qform_code = get<std::int16_t>(hdr, off::qform_code);
  if (sform_code > 0) {
    for (int c = 0; c < 3; ++c) {
      double norm = 0.0;
      for (int r = 0; r < 3; ++r) {
        const double v = get<float>(hdr, off::srow_x + 16 * r + 4 * c);
        g.direction[r][c] = v;
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (!(norm > 0.0)) throw FormatError("degenerate sform column");
      for (int r = 0; r < 3; ++r) g.direction[r][c] /= norm;
    }
    for (int r = 0; r < 3; ++r) g.origin[r] = get<float>(hdr, off::srow_x + 16 * r + 12);
  } else if (qform_code > 0) {
    const double qfac = get<float>(hdr, off::pixdim) < 0.0f ? -1.0 : 1.0;
    g.direction = quaternion_to_direction(get<float>(hdr, off::quatern_b), get<float>(hdr, off::quatern_b + 4),
                                          get<float>(hdr, off::quatern_b + 8), qfac);
    for (int r = 0; r < 3; ++r) g.origin[r] = get<float>(hdr, off::qoffset_x + 4 * r);
  }

  const double vox_offset = get<float>(hdr, off::vox_offset);
  if (vox_offset < kHeaderSize) throw FormatError("invalid NIfTI vox_offset");
  std::vector<unsigned char> skip(static_cast<std::size_t>(vox_offset) - kHeaderSize);
  if (!skip.empty()) read_exact(f.handle, skip.data(), skip.size(), path);

  const std::size_t n = g.voxel_count();
  std::vector<unsigned char> raw(n * bytes_per_voxel);
  read_exact(f.handle, raw.data(), raw.size(), path);

  const float slope = get<float>(hdr, off::scl_slope);
  const float inter = get<float>(hdr, off::scl_inter);
  const bool scaled = slope != 0.0f && std::isfinite(slope);

  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    switch (datatype) {
      case kDtUint8: v = raw[i]; break;
      case kDtInt16: v = get<std::int16_t>(raw.data(), static_cast<int>(2 * i)); break;
      default: v = get<float>(raw.data() + 4 * i, 0); break;
    }
    data[i] = scaled ? static_cast<double>(slope) * v + static_cast<double>(inter) : v;
  }
  return Volume(g, std::move(data));
}

bool wants_gzip(const std::filesystem::path& path) { return path.extension() == ".gz"; }

void write_nifti(const Geometry& g, std::int16_t datatype, const std::vector<unsigned char>& payload,
                 const std::filesystem::path& path) {
  unsigned char hdr[kVoxOffset] = {};
  put<std::int32_t>(hdr, off::sizeof_hdr, kHeaderSize);
  put<std::int16_t>(hdr, off::dim, 3);
  for (int a = 0; a < 3; ++a) put<std::int16_t>(hdr, off::dim + 2 * (a + 1), static_cast<std::int16_t>(g.dims[a]));
  for (int a = 4; a < 8; ++a) put<std::int16_t>(hdr, off::dim + 2 * a, 1);
  put<std::int16_t>(hdr, off::datatype, datatype);
  put<std::int16_t>(hdr, off::bitpix, datatype == kDtUint8 ? 8 : 32);

  const auto quat = direction_to_quaternion(g.direction);
  put<float>(hdr, off::pixdim, static_cast<float>(quat[3]));
  for (int a = 0; a < 3; ++a) put<float>(hdr, off::pixdim + 4 * (a + 1), static_cast<float>(g.spacing[a]));
  put<float>(hdr, off::vox_offset, static_cast<float>(kVoxOffset));
  put<float>(hdr, off::scl_slope, 0.0f);
  put<float>(hdr, off::scl_inter, 0.0f);
  hdr[off::xyzt_units] = 2;  // mm

  put<std::int16_t>(hdr, off::qform_code, 1);
  put<std::int16_t>(hdr, off::sform_code, 1);
  for (int i = 0; i < 3; ++i) {
    put<float>(hdr, off::quatern_b + 4 * i, static_cast<float>(quat[i]));
    put<float>(hdr, off::qoffset_x + 4 * i, static_cast<float>(g.origin[i]));
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      put<float>(hdr, off::srow_x + 16 * r + 4 * c, static_cast<float>(g.direction[r][c] * g.spacing[c]));
    }
    put<float>(hdr, off::srow_x + 16 * r + 12, static_cast<float>(g.origin[r]));
  }
  std::memcpy(hdr + off::magic, "n+1\0", 4);

  GzFile f(path, wants_gzip(path) ? "wb6" : "wbT");
  if (!f.handle) throw IoError("cannot open for writing: " + path.string());
  auto write = [&](const unsigned char* p, std::size_t n) {
    while (n > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
      const int put_n = gzwrite(f.handle, p, chunk);
      if (put_n <= 0) throw IoError("write failed: " + path.string());
      p += put_n;
      n -= static_cast<std::size_t>(put_n);
    }
  };
  write(hdr, sizeof hdr);
  write(payload.data(), payload.size());
  const int rc = gzclose(f.handle);
  f.handle = nullptr;
  if (rc != Z_OK) throw IoError("close failed: " + path.string());
}

}  // namespace

Volume load_nifti_volume(const std::filesystem::path& path) { return read_nifti(path); }

Mask load_nifti_mask(const std::filesystem::path& path) { return to_mask(read_nifti(path)); }

void save_nifti(const Volume& v, const std::filesystem::path& path) {
  std::vector<unsigned char> payload(v.size() * 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const float x = static_cast<float>(v[i]);
    std::memcpy(payload.data() + 4 * i, &x, 4);
  }
  write_nifti(v.geometry(), kDtFloat32, payload, path);
}

void save_nifti(const Mask& m, const std::filesystem::path& path) {
  std::vector<unsigned char> payload(m.data().begin(), m.data().end());
  write_nifti(m.geometry(), kDtUint8, payload, path);
}

}  // namespace ipmn
