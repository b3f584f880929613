export * from "./document.js";
export * from "./selection.js";
export * from "./feedback.js";
export * from "./render.js";
export * from "./api.js";
