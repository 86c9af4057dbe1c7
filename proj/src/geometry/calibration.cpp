#include "fringeslam/geometry/calibration.hpp"

#include <fstream>
#include <json.hpp>

#include "fringeslam/core/errors.hpp"

namespace fringeslam::geometry {

namespace {

using nlohmann::ordered_json;

ordered_json model_to_json(const CameraModel& m) {
  ordered_json j;
  j["width"] = m.width;
  j["height"] = m.height;
  j["fx"] = m.intrinsics.fx;
  j["fy"] = m.intrinsics.fy;
  j["u0"] = m.intrinsics.u0;
  j["v0"] = m.intrinsics.v0;
  // Eigen stores column-major; emit row-major for readability.
  std::vector<double> r;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r.push_back(m.extrinsics.rotation(row, col));
  j["rotation"] = r;
  j["translation"] = std::vector<double>{m.extrinsics.translation.x(),
                                         m.extrinsics.translation.y(),
                                         m.extrinsics.translation.z()};
  return j;
}

CameraModel model_from_json(const ordered_json& j) {
  CameraModel m;
  try {
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.intrinsics.fx = j.at("fx").get<double>();
    m.intrinsics.fy = j.at("fy").get<double>();
    m.intrinsics.u0 = j.at("u0").get<double>();
    m.intrinsics.v0 = j.at("v0").get<double>();
    const auto r = j.at("rotation").get<std::vector<double>>();
    const auto t = j.at("translation").get<std::vector<double>>();
    if (r.size() != 9 || t.size() != 3)
      throw ConfigError("calibration: rotation needs 9 entries, translation 3");
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) m.extrinsics.rotation(row, col) = r[3 * row + col];
    m.extrinsics.translation = Vec3(t[0], t[1], t[2]);
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("calibration: ") + e.what());
  }
  return m;
}

}  // namespace

Mat34 projection_matrix(const CameraModel& model) {
  return build_projection_matrix(model.intrinsics, model.extrinsics);
}

void validate(const CameraModel& model) {
  validate(model.intrinsics);
  validate(model.extrinsics);
  if (model.width <= 0 || model.height <= 0)
    throw ConfigError("calibration: image dimensions must be positive");
}

void validate(const CalibrationPair& calibration) {
  validate(calibration.camera);
  validate(calibration.projector);
}

CalibrationPair load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open calibration file: " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const ordered_json::exception& e) {
    throw DataError("calibration parse error: " + std::string(e.what()));
  }
  if (!j.contains("camera") || !j.contains("projector"))
    throw ConfigError("calibration: missing camera or projector block");
  CalibrationPair calibration{model_from_json(j["camera"]), model_from_json(j["projector"])};
  validate(calibration);
  return calibration;
}

void save_calibration(const std::filesystem::path& path, const CalibrationPair& calibration) {
  validate(calibration);
  ordered_json j;
  j["camera"] = model_to_json(calibration.camera);
  j["projector"] = model_to_json(calibration.projector);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write calibration file: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace fringeslam::geometry
