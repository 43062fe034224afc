#include "bwbary/matrix_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bwbary {

const char* to_string(MatrixKind kind) {
  return kind == MatrixKind::Covariance ? "covariance" : "map";
}

nlohmann::json matrix_to_json(const Matrix& m, MatrixKind kind) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::InvalidInput, "only square matrices are serialized");
  nlohmann::json data = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"dim", m.rows()}, {"kind", to_string(kind)}, {"data", std::move(data)}};
}

MatrixFile matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("kind") || !j.contains("data")) {
    throw Error(ErrorKind::InvalidInput, "matrix file needs dim, kind and data");
  }
  if (!j["dim"].is_number_integer() || j["dim"].get<std::int64_t>() < 1) {
    throw Error(ErrorKind::InvalidInput, "dim must be a positive integer");
  }
  const auto dim = static_cast<Index>(j["dim"].get<std::int64_t>());
  const auto& kind = j["kind"];
  MatrixFile out;
  if (kind == "covariance") {
    out.kind = MatrixKind::Covariance;
  } else if (kind == "map") {
    out.kind = MatrixKind::Map;
  } else {
    throw Error(ErrorKind::InvalidInput, "kind must be covariance or map");
  }
  const auto& data = j["data"];
  if (!data.is_array() || static_cast<Index>(data.size()) != dim * dim) {
    throw Error(ErrorKind::InvalidInput, "data must hold dim*dim numbers");
  }
  out.data.resize(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index k = 0; k < dim; ++k) {
      const auto& v = data[static_cast<std::size_t>(i * dim + k)];
      if (!v.is_number()) throw Error(ErrorKind::InvalidInput, "data entries must be numbers");
      out.data(i, k) = v.get<double>();
    }
  }
  return out;
}

void save_matrix(const std::filesystem::path& path, const Matrix& m, MatrixKind kind) {
  write_text_file(path, matrix_to_json(m, kind).dump() + "\n");
}

MatrixFile load_matrix(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
  }
  try {
    return matrix_from_json(j);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

CovMatrix load_covariance(const std::filesystem::path& path) {
  auto file = load_matrix(path);
  if (file.kind != MatrixKind::Covariance) {
    throw Error(ErrorKind::InvalidInput, path.string() + ": expected a covariance file");
  }
  return CovMatrix(std::move(file.data));
}

SymMap load_map(const std::filesystem::path& path) { return SymMap(load_matrix(path).data); }

std::string file_digest(const std::filesystem::path& path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : read_text_file(path)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace bwbary
