#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "app.hpp"
#include "foilgen/dataset.hpp"
#include "foilgen/pipeline.hpp"
#include "foilgen/vae.hpp"

namespace httplib {
class Server;
}

namespace foilgen::app {

struct Reply {
    int status = 200;
    Json body;
};

struct ServiceOptions {
    double alpha_deg = 5.0;
    // Latent map roundness: every k-th item, 0 for none.
    std::size_t roundness_stride = 0;
    std::uint64_t seed = 1;  // default for /sample requests without one
    std::uint64_t split_seed = 1;
};

// Request handlers over one immutable model. Every method is a pure function
// of the request, so concurrent calls are safe.
class Service {
public:
    Service(vae::CvaeModel model, std::optional<dataset::Dataset> data, ServiceOptions options);

    Json model_info() const;
    Reply decode(const std::string& body) const;
    Reply sample(const std::string& body) const;
    Reply latent_map() const;

private:
    vae::CvaeModel model_;
    std::optional<dataset::Dataset> data_;
    ServiceOptions options_;
    pipeline::ReferenceSets refs_;
    std::optional<pipeline::Envelope> envelope_;
    Json latent_map_;
};

void mount(httplib::Server& server, const Service& service);

// Blocks until the server stops.
int serve(const Json& cfg, std::ostream& log);

}  // namespace foilgen::app
