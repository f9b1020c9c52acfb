#pragma once

#include <string>
#include <vector>

namespace linktheft::cli {

int cmd_train(const std::vector<std::string>& args);
int cmd_attack(const std::vector<std::string>& args);
int cmd_serve(const std::vector<std::string>& args);
int cmd_report(const std::vector<std::string>& args);
int cmd_baseline(const std::vector<std::string>& args);
int cmd_ablate(const std::vector<std::string>& args);

}  // namespace linktheft::cli
