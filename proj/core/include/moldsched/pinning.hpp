#pragma once

namespace moldsched {

/// Binds the calling thread to hardware thread `cpu`. Returns false when the
/// platform refuses or does not support it.
bool pin_current_thread(int cpu);

}  // namespace moldsched
