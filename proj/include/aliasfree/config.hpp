#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "aliasfree/activations.hpp"
#include "aliasfree/upsamplers.hpp"

namespace aliasfree {

// Activation configurations land in the main summary unless marked as part of
// the oversampling study.
enum class ReportGroup { Main, Oversampling };

struct NamedActivation {
  std::string name;
  ActivationSpec spec;
  ReportGroup group = ReportGroup::Main;
};

struct NamedUpsampler {
  std::string name;
  UpsamplerSpec spec;
};

struct ConfigSet {
  std::vector<NamedActivation> activations;
  std::vector<NamedUpsampler> upsamplers;
  [[nodiscard]] bool empty() const noexcept { return activations.empty() && upsamplers.empty(); }
};

// Parses key=value blocks separated by blank lines. '#' starts a comment.
// Every block needs `name` and `kind`; the kind decides whether it is an
// activation or an upsampler. Unknown keys, duplicate names and invalid values
// throw ConfigError.
//
//   name=adaa_c2
//   kind=adaa_snakebeta
//   oversample=2
ConfigSet parse_config(std::string_view text);
ConfigSet load_config(const std::filesystem::path& path);

// Canonical text of one block: every key, fixed order, round-trip precision.
std::string serialize(const NamedActivation& a);
std::string serialize(const NamedUpsampler& u);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
// fnv1a64 of the canonical block, as 16 lowercase hex digits.
std::string config_hash(const NamedActivation& a);
std::string config_hash(const NamedUpsampler& u);

// Table rows and the oversampling study.
std::vector<NamedActivation> default_activation_configs();
// One block per upsampler kind at `factor`.
std::vector<NamedUpsampler> default_upsampler_configs(std::size_t factor, std::uint64_t seed);

}  // namespace aliasfree
