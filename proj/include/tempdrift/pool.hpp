/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <cstddef>
#include <functional>

namespace tempdrift {

/// Calls fn(0) ... fn(count - 1) on up to `workers` threads (workers <= 1 runs
/// inline, in order). After the first exception no new indices are started;
/// it is rethrown once every running call has returned.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}// namespace tempdrift
