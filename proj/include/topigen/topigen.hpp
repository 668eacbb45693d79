#pragma once

// Umbrella header. The annotator client pulls in httplib (sockets, threads);
// include topigen/annotator.hpp separately if you need it.

#include "topigen/category_graph.hpp"
#include "topigen/core.hpp"
#include "topigen/documents.hpp"
#include "topigen/generalizer.hpp"
#include "topigen/index_io.hpp"
#include "topigen/ingest.hpp"
#include "topigen/layout.hpp"
#include "topigen/profile.hpp"
