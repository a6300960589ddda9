#pragma once

#include <stdexcept>
#include <string>

namespace sigmak {

// Error categories map onto CLI exit codes (see cli/pipeline).
enum class ErrorKind { Argument, Domain, Grid, Accuracy, Resonant, Divergence, Construction, Config, Chart, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error argument_error(const std::string& m) { return Error(ErrorKind::Argument, m); }
inline Error domain_error(const std::string& m) { return Error(ErrorKind::Domain, m); }
inline Error grid_error(const std::string& m) { return Error(ErrorKind::Grid, m); }
inline Error accuracy_error(const std::string& m) { return Error(ErrorKind::Accuracy, m); }
inline Error resonant_error(const std::string& m) { return Error(ErrorKind::Resonant, m); }
inline Error divergence_error(const std::string& m) { return Error(ErrorKind::Divergence, m); }
inline Error construction_error(const std::string& m) { return Error(ErrorKind::Construction, m); }
inline Error config_error(const std::string& m) { return Error(ErrorKind::Config, m); }
inline Error chart_error(const std::string& m) { return Error(ErrorKind::Chart, m); }
inline Error io_error(const std::string& m) { return Error(ErrorKind::Io, m); }

}  // namespace sigmak
