/* Copyright 2026 The CGM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef CGM_UTIL_HASH_HPP_
#define CGM_UTIL_HASH_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace cgm {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
// Throws IoError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace cgm

#endif  // CGM_UTIL_HASH_HPP_
