#pragma once

namespace onsetwarn {

/// Routes spdlog to stderr at the level named by ONSET_WARN_LOG
/// (quiet, info, debug; default info). Unknown values fall back to info.
void init_logging();

}  // namespace onsetwarn
