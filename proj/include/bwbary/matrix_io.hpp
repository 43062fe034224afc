#pragma once

// MatrixFile JSON: {"dim": N, "kind": "covariance"|"map", "data": [N*N row-major]}.
// Doubles are written in shortest round-trip form, so save/load is bit-exact.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bwbary/linalg.hpp"

namespace bwbary {

enum class MatrixKind { Covariance, Map };

const char* to_string(MatrixKind kind);

struct MatrixFile {
  MatrixKind kind = MatrixKind::Covariance;
  Matrix data;
};

nlohmann::json matrix_to_json(const Matrix& m, MatrixKind kind);
MatrixFile matrix_from_json(const nlohmann::json& j);

void save_matrix(const std::filesystem::path& path, const Matrix& m, MatrixKind kind);
inline void save_matrix(const std::filesystem::path& path, const CovMatrix& m) {
  save_matrix(path, m.matrix(), MatrixKind::Covariance);
}
inline void save_matrix(const std::filesystem::path& path, const SymMap& m) {
  save_matrix(path, m.matrix(), MatrixKind::Map);
}

MatrixFile load_matrix(const std::filesystem::path& path);
/// Requires kind "covariance" and runs the CovMatrix checks.
CovMatrix load_covariance(const std::filesystem::path& path);
SymMap load_map(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of the file bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace bwbary
