#ifndef DUCTWARP_MANIFEST_HPP
#define DUCTWARP_MANIFEST_HPP

#include <string>
#include <vector>

namespace ductwarp {

/// Run manifest: inputs, parameter values and output content hashes, written
/// next to the artifacts so a run can be reproduced and checked byte for
/// byte.
class RunManifest {
public:
    explicit RunManifest(std::string command);

    void add_input(const std::string& role, const std::string& path);
    void add_parameter(const std::string& key, const std::string& value);
    void add_parameter(const std::string& key, double value);
    /// Records an output file; hashes its current contents.
    void add_output(const std::string& path);

    /// Deterministic JSON (sorted keys, no timestamps).
    std::string to_json() const;
    void write(const std::string& path) const;

private:
    struct Entry {
        std::string key;
        std::string value;
    };
    std::string command_;
    std::vector<Entry> inputs_;
    std::vector<Entry> parameters_;
    std::vector<Entry> outputs_; // value = content hash
};

/// FNV-1a 64-bit content hash of a file, as a 16-digit hex string.
std::string hash_file(const std::string& path);

} // namespace ductwarp

#endif
