#pragma once

#include <string>
#include <vector>

namespace mdpst {

// Exit codes: 0 success, 1 validation/file error, 2 usage error.
int dispatch(const std::vector<std::string>& args);

}  // namespace mdpst
