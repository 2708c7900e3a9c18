#pragma once

namespace pda {

inline constexpr const char* kVersion = "0.1.0";

// Name and version of the random stream construction; outputs embed it so
// results can be tied to the generator that produced them.
inline constexpr const char* kGeneratorName = "splitmix64/v1";

}  // namespace pda
