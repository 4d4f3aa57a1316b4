#include "authguess/authguess.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "authguess/errors.hpp"
#include "authguess/spec_io.hpp"

struct ag_problem {
    std::string spec_json;
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_err(char** errmsg, const std::string& msg) {
    if (errmsg) *errmsg = dup_string(msg);
}

ag_status status_for(const std::exception& e) {
    if (dynamic_cast<const authguess::InvalidInputError*>(&e)) return AG_EINVAL;
    if (dynamic_cast<const authguess::ConvergenceError*>(&e)) return AG_ENOCONV;
    if (dynamic_cast<const authguess::SizeLimitError*>(&e)) return AG_ELIMIT;
    return AG_EINTERNAL;
}

}  // namespace

extern "C" {

ag_status ag_problem_parse(const char* spec_json, ag_problem** out, char** errmsg) {
    if (out) *out = nullptr;
    if (errmsg) *errmsg = nullptr;
    if (!spec_json || !out) {
        set_err(errmsg, "spec_json and out must be non-NULL");
        return AG_EINVAL;
    }
    try {
        authguess::parse_problem_spec(spec_json);  // validate eagerly
        *out = new ag_problem{spec_json};
        return AG_OK;
    } catch (const std::exception& e) {
        set_err(errmsg, e.what());
        return status_for(e);
    } catch (...) {
        set_err(errmsg, "unknown internal error");
        return AG_EINTERNAL;
    }
}

void ag_problem_free(ag_problem* p) { delete p; }

ag_status ag_run(const ag_problem* p, const char* command, const char* overrides_json,
                 char** out, char** errmsg) {
    if (out) *out = nullptr;
    if (errmsg) *errmsg = nullptr;
    if (!p || !command || !out) {
        set_err(errmsg, "problem, command, and out must be non-NULL");
        return AG_EINVAL;
    }
    try {
        std::string doc = authguess::run_command(
            p->spec_json, command, overrides_json ? overrides_json : "");
        *out = dup_string(doc);
        if (!*out) {
            set_err(errmsg, "out of memory");
            return AG_EINTERNAL;
        }
        return AG_OK;
    } catch (const std::exception& e) {
        set_err(errmsg, e.what());
        return status_for(e);
    } catch (...) {
        set_err(errmsg, "unknown internal error");
        return AG_EINTERNAL;
    }
}

void ag_string_free(char* s) { std::free(s); }

const char* ag_version(void) { return authguess::kToolVersion; }

}  // extern "C"
