#pragma once

// Release identity reported by --version and embedded in every JSON report.
#define CONSTEL_VERSION "0.1.0"
