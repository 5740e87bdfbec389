#pragma once

#include <string>
#include <vector>

#include "semfuse/calibration.hpp"

namespace semfuse {

// Binary logit dataset for offline ingestion of real model outputs.
//
// Layout (little-endian):
//   magic   "SFLG"
//   version u32 = 1
//   N       u64
//   C       u32
//   N records of C float32 logits followed by a u32 label.
struct LogitDataset {
    std::vector<Logits> logits;
    std::vector<int> labels;
    int num_classes = 0;
};

void write_logit_file(const std::string& path, const LogitDataset& ds);
LogitDataset read_logit_file(const std::string& path);

}  // namespace semfuse
