#pragma once

#include "socfault/isa.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace socfault {

struct ProgramImage {
    u64 base = 0x48000;
    u64 entry = 0x48000;
    std::vector<u32> words; // contiguous from base; gaps are zero (nop)

    u64 end() const { return base + words.size() * 4; }
};

class AsmError : public std::runtime_error {
public:
    AsmError(const std::string& file, int line, const std::string& msg);
    int line;
};

/// One instruction per line, `;` comments, labels (`name:`), `.org ADDR`.
/// Branch immediates are word-relative and resolved from labels or `#n`.
ProgramImage assemble(const std::string& source, const std::string& file_name = "<memory>");

ProgramImage assemble_file(const std::string& path);

/// Flat little-endian binary plus a JSON sidecar {base, entry} at path.json.
void save_image(const ProgramImage& image, const std::string& bin_path);
ProgramImage load_image(const std::string& bin_path);

} // namespace socfault
