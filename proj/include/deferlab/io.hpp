#pragma once

// File-format primitives: shortest round-trip float formatting, the dataset
// CSV schema (x_0,...,x_{d-1},y,m with m empty when absent), and the JSON
// atomic-world description.

#include <string>
#include <vector>

#include "deferlab/core.hpp"

namespace deferlab {

// Shortest decimal string that round-trips to the same double (std::to_chars);
// the basis of byte-stable CSV output.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
void ensure_dir(const std::string& path);

// Dataset CSV: header "x_0,...,x_{d-1},y,m"; one row per sample; the m field
// is left empty for expert-unlabeled samples.
std::string dataset_to_csv(const std::vector<Sample>& data);
std::vector<Sample> dataset_from_csv(const std::string& csv);
void write_dataset_csv(const std::string& path, const std::vector<Sample>& data);
std::vector<Sample> read_dataset_csv(const std::string& path);

// Atomic world JSON: {"num_classes", "points", "masses", "label_dist",
// "expert_dist"}; validated on load.
AtomicWorld atomic_world_from_json(const std::string& json_text);
std::string atomic_world_to_json(const AtomicWorld& world);
AtomicWorld load_atomic_world_json(const std::string& path);

}  // namespace deferlab
