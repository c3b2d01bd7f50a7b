#pragma once

#include <stdexcept>
#include <string>

namespace solarcast {

/// Base for every error raised by the library. The category drives the CLI
/// exit code (1 config, 2 data, 3 numerical).
class Error : public std::runtime_error {
public:
	enum class Category { Config = 1, Data = 2, Numerical = 3 };

	Error(Category category, const std::string& what)
	    : std::runtime_error(what), category_(category) {}

	Category category() const noexcept { return category_; }

private:
	Category category_;
};

class ConfigError : public Error {
public:
	explicit ConfigError(const std::string& what) : Error(Category::Config, what) {}
};

class DataError : public Error {
public:
	explicit DataError(const std::string& what) : Error(Category::Data, what) {}
};

class NumericalError : public Error {
public:
	explicit NumericalError(const std::string& what) : Error(Category::Numerical, what) {}
};

} // namespace solarcast
