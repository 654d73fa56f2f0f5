#pragma once

// Plain-text artifact format for fitted rRBF models and linear projectors.
// Numbers carry 17 significant digits, so save/load is exact.
//
//   crsom-artifact 1
//   kind rrbf|pca|lda
//   classes K
//   class_name <text>          (K lines, possibly none)
//   normalizer zscore|isotropic <unit 0|1> <d>   or   normalizer none
//   mean ... / scale ...       (only with a normalizer)
//   ...kind-specific blocks...
//   end

#include "crsom/baselines.hpp"
#include "crsom/core.hpp"
#include "crsom/data.hpp"
#include "crsom/rrbf.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace crsom {

struct Artifact {
  std::variant<RrbfModel, LinearProjector> model;
  std::optional<NormalizationParams> normalizer;
  std::size_t num_classes = 0;
  std::vector<std::string> class_names;

  std::size_t input_dim() const;
};

std::string serialize_artifact(const Artifact& artifact);
// Throws FormatError on anything malformed or inconsistent.
Artifact parse_artifact(std::string_view text);

void save_artifact(const std::filesystem::path& path, const Artifact& artifact);
Artifact load_artifact(const std::filesystem::path& path);

}  // namespace crsom
